//! Command-line surface of the confluent free-field engine: algebra
//! inspection, realization dumps, Verma matrix elements, OPE checks,
//! correlators and numeric integration.
//!
//! Exit codes: 0 success, 1 failed identity check, 2 usage error,
//! 3 unsupported input.

mod config;

use config::KvConfig;
use confluent_cft::algebra::lie::{AlgebraError, BasisElt, LieAlgebraData, Root, TruncatedElement};
use confluent_cft::algebra::multipoly::MultiPoly;
use confluent_cft::algebra::scalar::Scalar;
use confluent_cft::correlators::{
    integrate, omega_sl2_closed, omega_ward, omega_wick, Cycle, InsertionConfig, NumericWeights,
    PrimaryDatum, PrimaryInsertion,
};
use confluent_cft::diffreal::Realizer;
use confluent_cft::ope::currents::{build_currents, solve_r_coeffs, t_sugawara, CurrentSet};
use confluent_cft::ope::primary::{
    mode_action, primary_field, t_phi_ope, vertex_field, virasoro_commutator,
    virasoro_from_decomposition,
};
use confluent_cft::ope::{ope, Field};
use confluent_cft::verma::{matrix_element, WeightTuple};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::collections::BTreeMap;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Unsupported(String),
    CheckFailed(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Unsupported(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Unsupported(m) | CliError::CheckFailed(m) => m,
        }
    }
}

fn usage() -> String {
    "usage: ccft <command> [flags]\n\
     commands:\n\
       algebra        --series A --rank N [--format text|json]\n\
       realize        --algebra A1 --r R --element f[1] [--format text|json]\n\
       matrix-element --algebra A1 --r R --eword MODES --fword MODES [--format]\n\
       ope            --algebra A1 --lhs H1 --rhs F1 [--r R] [--order N] [--format]\n\
       primary-check  --algebra A1 --r R [--format]\n\
       correlator     --config FILE | inline flags [--route ward|wick|closed|all]\n\
       integrate      --config FILE"
        .to_string()
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(out) => {
            print!("{out}");
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.code());
        }
    }
}

struct Flags {
    map: BTreeMap<String, Vec<String>>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Flags, CliError> {
        let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut i = 0;
        while i < args.len() {
            let a = &args[i];
            let Some(name) = a.strip_prefix("--") else {
                return Err(CliError::Usage(format!("unexpected argument '{a}'")));
            };
            let value = if i + 1 < args.len() && !args[i + 1].starts_with("--") {
                i += 1;
                args[i].clone()
            } else {
                String::new()
            };
            map.entry(name.to_string()).or_default().push(value);
            i += 1;
        }
        Ok(Flags { map })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.map
            .get(name)
            .and_then(|v| v.first())
            .map(String::as_str)
    }

    fn require(&self, name: &str) -> Result<&str, CliError> {
        self.get(name)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
    }

    fn get_all(&self, name: &str) -> Vec<&str> {
        self.map
            .get(name)
            .map(|v| v.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }
}

fn run(args: &[String]) -> Result<String, CliError> {
    let Some((cmd, rest)) = args.split_first() else {
        return Err(CliError::Usage(usage()));
    };
    let flags = Flags::parse(rest)?;
    match cmd.as_str() {
        "algebra" => cmd_algebra(&flags),
        "realize" => cmd_realize(&flags),
        "matrix-element" => cmd_matrix_element(&flags),
        "ope" => cmd_ope(&flags),
        "primary-check" => cmd_primary_check(&flags),
        "correlator" => cmd_correlator(&flags),
        "integrate" => cmd_integrate(&flags),
        other => Err(CliError::Usage(format!(
            "unknown command '{other}'\n{}",
            usage()
        ))),
    }
}

fn build_algebra_from(series: &str, rank: &str) -> Result<LieAlgebraData, CliError> {
    let series_char = series
        .chars()
        .next()
        .ok_or_else(|| CliError::Usage("empty series".into()))?;
    let rank: usize = rank
        .parse()
        .map_err(|_| CliError::Usage(format!("rank '{rank}' is not a positive integer")))?;
    LieAlgebraData::build(series_char, rank).map_err(|e| match e {
        AlgebraError::Unsupported { .. } => CliError::Unsupported(e.to_string()),
        other => CliError::Usage(other.to_string()),
    })
}

fn parse_algebra(flags: &Flags) -> Result<LieAlgebraData, CliError> {
    if let (Some(series), Some(rank)) = (flags.get("series"), flags.get("rank")) {
        return build_algebra_from(series, rank);
    }
    let spec = flags.require("algebra")?;
    parse_algebra_str(spec)
}

fn parse_algebra_str(spec: &str) -> Result<LieAlgebraData, CliError> {
    if spec.len() < 2 {
        return Err(CliError::Usage(format!(
            "algebra '{spec}' must look like A1, A2, ..."
        )));
    }
    build_algebra_from(&spec[..1], &spec[1..])
}

fn parse_r(flags: &Flags) -> Result<usize, CliError> {
    flags
        .require("r")?
        .parse()
        .map_err(|_| CliError::Usage("flag --r must be a nonnegative integer".into()))
}

fn format_of(flags: &Flags) -> Result<&'static str, CliError> {
    match flags.get("format") {
        None | Some("text") | Some("") => Ok("text"),
        Some("json") => Ok("json"),
        Some(other) => Err(CliError::Usage(format!(
            "unknown format '{other}', expected text or json"
        ))),
    }
}

fn cmd_algebra(flags: &Flags) -> Result<String, CliError> {
    let alg = parse_algebra(flags)?;
    if format_of(flags)? == "json" {
        let roots: Vec<String> = alg.positive_roots.iter().map(Root::name).collect();
        let mut brackets = Vec::new();
        for a in alg.basis() {
            for b in alg.basis() {
                let br = alg.bracket(a, b);
                if !br.is_empty() {
                    let terms: Vec<Value> = br
                        .iter()
                        .map(|(c, t)| json!({"coeff": c.to_string(), "elt": basis_name(&alg, *t)}))
                        .collect();
                    brackets.push(json!({
                        "lhs": basis_name(&alg, a),
                        "rhs": basis_name(&alg, b),
                        "value": terms,
                    }));
                }
            }
        }
        let v = json!({
            "series": alg.series.to_string(),
            "rank": alg.rank,
            "dual_coxeter": alg.dual_coxeter(),
            "positive_roots": roots,
            "cartan": alg.cartan,
            "brackets": brackets,
        });
        Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
    } else {
        let mut out = format!("algebra {}{}\n", alg.series, alg.rank);
        out += &format!(
            "positive roots: {}\n",
            alg.positive_roots
                .iter()
                .map(Root::name)
                .collect::<Vec<_>>()
                .join(", ")
        );
        out += &format!("cartan matrix: {:?}\n", alg.cartan);
        out += &format!("dual coxeter number: {}\n", alg.dual_coxeter());
        Ok(out)
    }
}

fn basis_name(alg: &LieAlgebraData, b: BasisElt) -> String {
    match b {
        BasisElt::E(r) => format!("e[{}]", alg.positive_roots[r as usize].name()),
        BasisElt::F(r) => format!("f[{}]", alg.positive_roots[r as usize].name()),
        BasisElt::H(i) => format!("h{i}"),
    }
}

/// Element grammar: [efh] index? mode?  with index a simple-root number or a
/// parenthesized root like (1+2), and mode in square brackets (default 0).
fn parse_element(alg: &LieAlgebraData, s: &str) -> Result<TruncatedElement, CliError> {
    let bad = |m: &str| CliError::Usage(format!("cannot parse element '{s}': {m}"));
    let mut rest = s.trim();
    let letter = rest.chars().next().ok_or_else(|| bad("empty"))?;
    rest = &rest[1..];
    let mut mode = 0usize;
    if let Some(open) = rest.find('[') {
        let close = rest.find(']').ok_or_else(|| bad("missing ']'"))?;
        mode = rest[open + 1..close]
            .parse()
            .map_err(|_| bad("mode must be an integer"))?;
        rest = &rest[..open];
    }
    let root_idx = |token: &str| -> Result<usize, CliError> {
        if token.is_empty() {
            if alg.rank == 1 {
                return Ok(alg.simple_root_index(1));
            }
            return Err(bad("rank > 1 needs a root index, e.g. f1 or f(1+2)"));
        }
        if let Some(inner) = token.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            let mut coeffs = vec![0u8; alg.rank];
            for part in inner.split('+') {
                let i: usize = part
                    .trim()
                    .parse()
                    .map_err(|_| bad("root must be like (1+2)"))?;
                if i == 0 || i > alg.rank {
                    return Err(bad("simple-root index out of range"));
                }
                coeffs[i - 1] += 1;
            }
            alg.root_index(&Root(coeffs))
                .ok_or_else(|| bad("not a positive root"))
        } else {
            let i: usize = token.parse().map_err(|_| bad("bad simple-root index"))?;
            if i == 0 || i > alg.rank {
                return Err(bad("simple-root index out of range"));
            }
            Ok(alg.simple_root_index(i))
        }
    };
    let base = match letter {
        'e' => BasisElt::E(root_idx(rest)? as u8),
        'f' => BasisElt::F(root_idx(rest)? as u8),
        'h' => {
            let i: usize = if rest.is_empty() {
                1
            } else {
                rest.parse().map_err(|_| bad("bad cartan index"))?
            };
            if i == 0 || i > alg.rank {
                return Err(bad("cartan index out of range"));
            }
            BasisElt::H(i as u8)
        }
        _ => return Err(bad("letter must be e, f or h")),
    };
    Ok(TruncatedElement::new(base, mode))
}

fn cmd_realize(flags: &Flags) -> Result<String, CliError> {
    let alg = parse_algebra(flags)?;
    let r = parse_r(flags)?;
    let elt = parse_element(&alg, flags.require("element")?)?;
    if elt.mode as usize > r {
        return Err(CliError::Usage(format!(
            "element mode {} exceeds truncation order {r}",
            elt.mode
        )));
    }
    let realizer = Realizer::new(&alg, r);
    let lambda = WeightTuple::symbolic(0, alg.rank, r);
    let op = realizer.realize(elt, &lambda);
    if format_of(flags)? == "json" {
        let v = json!({
            "algebra": format!("{}{}", alg.series, alg.rank),
            "r": r,
            "element": flags.require("element")?,
            "operator": op.display(&alg),
        });
        Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
    } else {
        Ok(format!("{}\n", op.display(&alg)))
    }
}

/// Word grammar: comma-separated entries, each "p" (simple root 1, mode p) or
/// "i:p" (simple root i, mode p). Empty string is the empty word.
fn parse_word(alg: &LieAlgebraData, s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    let mut out = Vec::new();
    if s.trim().is_empty() {
        return Ok(out);
    }
    for entry in s.split(',') {
        let entry = entry.trim();
        let (root, mode) = match entry.split_once(':') {
            Some((i, p)) => (
                i.parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad word entry '{entry}'")))?,
                p.parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad word entry '{entry}'")))?,
            ),
            None => (
                1,
                entry
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad word entry '{entry}'")))?,
            ),
        };
        if root == 0 || root > alg.rank {
            return Err(CliError::Usage(format!(
                "word entry '{entry}': simple-root index out of range 1..={}",
                alg.rank
            )));
        }
        out.push((root, mode));
    }
    Ok(out)
}

fn cmd_matrix_element(flags: &Flags) -> Result<String, CliError> {
    let alg = parse_algebra(flags)?;
    let r = parse_r(flags)?;
    let eword = parse_word(&alg, flags.get("eword").unwrap_or(""))?;
    let fword = parse_word(&alg, flags.get("fword").unwrap_or(""))?;
    for &(_, mode) in eword.iter().chain(fword.iter()) {
        if mode > r {
            return Err(CliError::Usage(format!(
                "word mode {mode} exceeds truncation order {r}"
            )));
        }
    }
    let lambda = WeightTuple::symbolic(0, alg.rank, r);
    let ew: Vec<TruncatedElement> = eword
        .iter()
        .map(|&(i, p)| TruncatedElement::new(BasisElt::E(alg.simple_root_index(i) as u8), p))
        .collect();
    let fw: Vec<TruncatedElement> = fword
        .iter()
        .map(|&(i, p)| TruncatedElement::new(BasisElt::F(alg.simple_root_index(i) as u8), p))
        .collect();
    let me = matrix_element(&alg, r, &ew, &fw, &lambda);
    if format_of(flags)? == "json" {
        let v = json!({"matrix_element": me.to_string()});
        Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
    } else {
        Ok(format!("{me}\n"))
    }
}

fn solved_currents(alg: &LieAlgebraData) -> Result<CurrentSet, CliError> {
    let r = solve_r_coeffs(alg).map_err(|e| CliError::CheckFailed(e.to_string()))?;
    build_currents(alg, &r).map_err(|e| CliError::CheckFailed(e.to_string()))
}

/// Operand grammar for `ope`: T | Tsug | E<i> | H<i> | F<i> | s<i> | v | phi
/// (v and phi consume --r; phi also consumes --word).
fn parse_operand(
    alg: &LieAlgebraData,
    cur: &CurrentSet,
    flags: &Flags,
    s: &str,
) -> Result<Field, CliError> {
    let idx = |tail: &str| -> Result<usize, CliError> {
        if tail.is_empty() {
            if alg.rank == 1 {
                return Ok(1);
            }
            return Err(CliError::Usage("rank > 1 operands need an index".into()));
        }
        let i: usize = tail
            .parse()
            .map_err(|_| CliError::Usage(format!("bad operand index '{tail}'")))?;
        if i == 0 || i > alg.rank {
            return Err(CliError::Usage("operand index out of range".into()));
        }
        Ok(i)
    };
    match s {
        "T" => Ok(cur.t_free.clone()),
        "Tsug" => t_sugawara(alg, cur).map_err(|e| CliError::Unsupported(e.to_string())),
        "v" => {
            let r = parse_r(flags)?;
            Ok(vertex_field(&WeightTuple::symbolic(0, alg.rank, r)))
        }
        "phi" => {
            let r = parse_r(flags)?;
            let lambda = WeightTuple::symbolic(0, alg.rank, r);
            let word = parse_word(alg, flags.get("word").unwrap_or(""))?;
            let rz = Realizer::new(alg, r);
            let word_idx: Vec<(usize, usize)> = word
                .iter()
                .map(|&(i, p)| (alg.simple_root_index(i), p))
                .collect();
            let p = confluent_cft::diffreal::compute_p(&rz, &word_idx, &lambda);
            Ok(primary_field(&p, &lambda))
        }
        _ => {
            let (letter, tail) = s.split_at(1);
            match letter {
                "E" => Ok(cur.e[idx(tail)? - 1].clone()),
                "H" => Ok(cur.h[idx(tail)? - 1].clone()),
                "F" => Ok(cur.f[idx(tail)? - 1].clone()),
                "s" => Ok(cur.s[idx(tail)? - 1].clone()),
                _ => Err(CliError::Usage(format!(
                    "unknown operand '{s}' (expected T, Tsug, E<i>, H<i>, F<i>, s<i>, v, phi)"
                ))),
            }
        }
    }
}

fn cmd_ope(flags: &Flags) -> Result<String, CliError> {
    let alg = parse_algebra(flags)?;
    let cur = solved_currents(&alg)?;
    let lhs = parse_operand(&alg, &cur, flags, flags.require("lhs")?)?;
    let rhs = parse_operand(&alg, &cur, flags, flags.require("rhs")?)?;
    let order: i64 = match flags.get("order") {
        Some(o) => o
            .parse()
            .map_err(|_| CliError::Usage("flag --order must be an integer".into()))?,
        None => {
            let r: i64 = flags.get("r").and_then(|v| v.parse().ok()).unwrap_or(0);
            r + 2
        }
    };
    let res = ope(&alg, &lhs, &rhs, order).map_err(|e| CliError::CheckFailed(e.to_string()))?;
    let mut lines: Vec<(String, String)> = Vec::new();
    if !res.power_offset.is_zero() {
        lines.push(("(z-w)^offset".into(), res.power_offset.to_string()));
    }
    for (s, c) in &res.irregular {
        lines.push((format!("exp[(z-w)^-{s}]"), c.to_string()));
    }
    for (n, f) in &res.terms {
        lines.push((format!("(z-w)^{n}"), f.display(&alg)));
    }
    if format_of(flags)? == "json" {
        let items: Vec<Value> = lines
            .iter()
            .map(|(k, v)| json!({"power": k, "value": v}))
            .collect();
        let v = json!({"ope": items, "order": order});
        Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
    } else {
        let mut out = String::new();
        for (k, v) in lines {
            out += &format!("{k}: {v}\n");
        }
        Ok(out)
    }
}

fn thread_count() -> Result<usize, CliError> {
    match std::env::var("CCFT_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| {
            CliError::Usage(format!(
                "CCFT_THREADS must be a positive integer, got '{v}'"
            ))
        }),
        Err(_) => Ok(1),
    }
}

fn cmd_primary_check(flags: &Flags) -> Result<String, CliError> {
    let alg = parse_algebra(flags)?;
    if alg.rank != 1 {
        return Err(CliError::Unsupported(
            "primary-check runs the sl2 suites; use --algebra A1".into(),
        ));
    }
    let r = parse_r(flags)?;
    let threads = thread_count()?;
    let cur = solved_currents(&alg)?;
    let lambda = WeightTuple::symbolic(0, alg.rank, r);
    let rz = Realizer::new(&alg, r);

    // Prop 3.1 suite: f-words of length <= 3 with modes <= r, plus
    // annihilation/eigenvalue and above-truncation vanishing.
    let mut words: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for len in 1..=3usize {
        words.extend(mode_words(r, len));
    }
    let failures31: Vec<String> = {
        let chunks: Vec<Vec<Vec<(usize, usize)>>> = split_chunks(&words, threads);
        let mut failures: Vec<String> = Vec::new();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for chunk in &chunks {
                let alg = &alg;
                let cur = &cur;
                let rz = &rz;
                let lambda = &lambda;
                handles.push(scope.spawn(move || {
                    let mut local = Vec::new();
                    for word in chunk {
                        let mut phi = vertex_field(lambda);
                        let mut failed = false;
                        for &(_, mode) in word.iter().rev() {
                            match mode_action(alg, &cur.f[0], mode as i64, &phi) {
                                Ok(f) => phi = f,
                                Err(e) => {
                                    local.push(format!("word {word:?}: {e}"));
                                    failed = true;
                                    break;
                                }
                            }
                        }
                        if failed {
                            continue;
                        }
                        let p = confluent_cft::diffreal::compute_p(rz, word, lambda);
                        let expect = primary_field(&p, lambda);
                        if !phi.sub(&expect).is_zero() {
                            local.push(format!("mode action ≠ P for word {word:?}"));
                        }
                    }
                    local
                }));
            }
            for h in handles {
                failures.extend(h.join().expect("worker"));
            }
        });
        failures
    };

    let mut report = String::new();
    let mut all_ok = true;
    let push = |report: &mut String, all_ok: &mut bool, name: &str, ok: bool, detail: String| {
        *all_ok &= ok;
        report.push_str(&format!(
            "{} {}{}\n",
            if ok { "PASS" } else { "FAIL" },
            name,
            if detail.is_empty() {
                String::new()
            } else {
                format!(": {detail}")
            }
        ));
    };

    push(
        &mut report,
        &mut all_ok,
        &format!("prop3.1 f-word intertwining ({} words)", words.len()),
        failures31.is_empty(),
        failures31.join("; "),
    );

    // annihilation, eigenvalues, vanishing above truncation
    let v = vertex_field(&lambda);
    let mut ann_ok = true;
    let mut detail = String::new();
    for p in 0..=r + 3 {
        let e = mode_action(&alg, &cur.e[0], p as i64, &v)
            .map_err(|e| CliError::CheckFailed(e.to_string()))?;
        if !e.is_zero() {
            ann_ok = false;
            detail = format!("e[{p}]v_λ ≠ 0");
            break;
        }
        let h = mode_action(&alg, &cur.h[0], p as i64, &v)
            .map_err(|e| CliError::CheckFailed(e.to_string()))?;
        let expect = if p <= r {
            v.scale(&Scalar::lambda(0, p as u8, 1))
        } else {
            Field::zero()
        };
        if !h.sub(&expect).is_zero() {
            ann_ok = false;
            detail = format!("h[{p}]v_λ mismatch");
            break;
        }
    }
    push(
        &mut report,
        &mut all_ok,
        "prop3.1 annihilation / eigenvalues / truncation",
        ann_ok,
        detail,
    );

    // Prop 4.1: decomposition residual for P of degree <= 2.
    let mut polys: Vec<MultiPoly> = vec![MultiPoly::one()];
    for w in mode_words(r, 1).iter().chain(mode_words(r, 2).iter()) {
        polys.push(confluent_cft::diffreal::compute_p(&rz, w, &lambda));
    }
    let mut residuals = 0usize;
    let mut vir_fail = String::new();
    for p in &polys {
        let rep =
            t_phi_ope(&alg, &cur, p, &lambda).map_err(|e| CliError::CheckFailed(e.to_string()))?;
        if !rep.is_exact() {
            residuals += 1;
            continue;
        }
        for n in -1..=(r as i64 + 1) {
            let direct = virasoro_commutator(&alg, &cur, p, &lambda, n)
                .map_err(|e| CliError::CheckFailed(e.to_string()))?;
            let assembled = virasoro_from_decomposition(&alg, &rep, p, &lambda, n);
            if !direct.sub(&assembled).is_zero() {
                vir_fail = format!("virasoro route mismatch at n={n}");
            }
        }
        let dphi = primary_field(p, &lambda).derivative();
        let lm1 = virasoro_commutator(&alg, &cur, p, &lambda, -1)
            .map_err(|e| CliError::CheckFailed(e.to_string()))?;
        let got = lm1.terms.get(&0).cloned().unwrap_or_else(Field::zero);
        if !got.sub(&dphi).is_zero() || lm1.terms.len() > 1 {
            vir_fail = "[L_-1, Φ] ≠ ∂Φ".into();
        }
    }
    push(
        &mut report,
        &mut all_ok,
        &format!(
            "prop4.1 T(z)Φ(w) decomposition ({} polynomials)",
            polys.len()
        ),
        residuals == 0,
        if residuals > 0 {
            format!("{residuals} nonzero residuals")
        } else {
            String::new()
        },
    );
    push(
        &mut report,
        &mut all_ok,
        "prop4.1 virasoro commutators",
        vir_fail.is_empty(),
        vir_fail,
    );

    let out = if format_of(flags)? == "json" {
        let checks: Vec<Value> = report
            .lines()
            .map(|l| {
                let ok = l.starts_with("PASS");
                json!({"ok": ok, "check": l[5..].to_string()})
            })
            .collect();
        format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({"checks": checks, "ok": all_ok})).unwrap()
        )
    } else {
        report
    };
    if all_ok {
        Ok(out)
    } else {
        print!("{out}");
        Err(CliError::CheckFailed("primary-check found failures".into()))
    }
}

fn mode_words(r: usize, len: usize) -> Vec<Vec<(usize, usize)>> {
    if len == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for w in mode_words(r, len - 1) {
        for p in 0..=r {
            let mut w2 = w.clone();
            w2.push((0, p));
            out.push(w2);
        }
    }
    out
}

fn split_chunks<T: Clone>(items: &[T], n: usize) -> Vec<Vec<T>> {
    let n = n.max(1);
    let mut out = vec![Vec::new(); n];
    for (i, item) in items.iter().enumerate() {
        out[i % n].push(item.clone());
    }
    out
}

fn insertion_config_from(cfg: &KvConfig) -> Result<InsertionConfig, CliError> {
    let alg = parse_algebra_str(
        cfg.get("algebra")
            .ok_or_else(|| CliError::Usage("config field 'algebra' is required".into()))?,
    )?;
    let mut screenings = Vec::new();
    for s in cfg.get_all("screening") {
        let i: usize = s.trim().parse().map_err(|_| {
            CliError::Usage(format!("config field 'screening': bad root index '{s}'"))
        })?;
        screenings.push(i);
    }
    let mut primaries = Vec::new();
    for (a, p) in cfg.get_all("primary").iter().enumerate() {
        let fields = KvConfig::fields(p);
        let r: usize = fields
            .get("r")
            .ok_or_else(|| {
                CliError::Usage(format!("config field 'primary' #{}: missing r=", a + 1))
            })?
            .parse()
            .map_err(|_| CliError::Usage(format!("config field 'primary' #{}: bad r=", a + 1)))?;
        let word = parse_word(&alg, fields.get("word").map(String::as_str).unwrap_or(""))?;
        primaries.push(PrimaryInsertion {
            lambda: WeightTuple::symbolic(a as u16, alg.rank, r),
            datum: PrimaryDatum::Word(word),
        });
    }
    Ok(InsertionConfig {
        alg,
        screenings,
        primaries,
    })
}

fn load_config(flags: &Flags) -> Result<KvConfig, CliError> {
    if let Some(path) = flags.get("config") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config '{path}': {e}")))?;
        KvConfig::parse(&text).map_err(CliError::Usage)
    } else {
        // inline flags: algebra, screening (repeated), primary (repeated)
        let mut entries = Vec::new();
        if let Some(a) = flags.get("algebra") {
            entries.push(("algebra".to_string(), a.to_string()));
        }
        for s in flags.get_all("screening") {
            entries.push(("screening".to_string(), s.to_string()));
        }
        for p in flags.get_all("primary") {
            entries.push(("primary".to_string(), p.to_string()));
        }
        if entries.is_empty() {
            return Err(CliError::Usage(
                "correlator needs --config FILE or inline --algebra/--screening/--primary flags"
                    .into(),
            ));
        }
        Ok(KvConfig { entries })
    }
}

fn cmd_correlator(flags: &Flags) -> Result<String, CliError> {
    let kv = load_config(flags)?;
    let cfg = insertion_config_from(&kv)?;
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let route = flags.get("route").or(kv.get("route")).unwrap_or("ward");
    let ward = || omega_ward(&cfg).map_err(|e| CliError::CheckFailed(e.to_string()));
    let wick = || omega_wick(&cfg).map_err(|e| CliError::CheckFailed(e.to_string()));
    let closed = || {
        omega_sl2_closed(&cfg).map_err(|e| match e {
            confluent_cft::correlators::CorrError::Unsupported(m) => CliError::Unsupported(m),
            other => CliError::CheckFailed(other.to_string()),
        })
    };
    let (value, note) = match route {
        "ward" => (ward()?, String::new()),
        "wick" => (wick()?, String::new()),
        "closed" => (closed()?, String::new()),
        "all" => {
            let a = ward()?;
            let b = wick()?;
            if !a.equals(&b) {
                return Err(CliError::CheckFailed(
                    "ward and wick routes disagree".into(),
                ));
            }
            let note = if cfg.alg.rank == 1 {
                let c = closed()?;
                if !a.equals(&c) {
                    return Err(CliError::CheckFailed(
                        "ward and closed routes disagree".into(),
                    ));
                }
                "routes ward = wick = closed".to_string()
            } else {
                "routes ward = wick".to_string()
            };
            (a, note)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown route '{other}', expected ward|wick|closed|all"
            )))
        }
    };
    let canonical = value.canonical_string();
    if format_of(flags)? == "json" {
        let terms: Vec<Value> = value
            .terms
            .iter()
            .map(|(k, c)| {
                let dens: Vec<Value> = k
                    .iter()
                    .map(|(p, e)| json!({"factor": p.to_string(), "power": e}))
                    .collect();
                json!({"coeff": c.to_string(), "denominator": dens})
            })
            .collect();
        let v = json!({
            "omega": canonical,
            "route": route,
            "terms": terms,
            "note": note,
        });
        Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
    } else {
        let mut out = format!("omega = {canonical}\n");
        if !note.is_empty() {
            out += &format!("{note}\n");
        }
        Ok(out)
    }
}

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    let re: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad complex number '{s}'")))?;
    let im: f64 = if parts.len() > 1 {
        parts[1]
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad complex number '{s}'")))?
    } else {
        0.0
    };
    Ok(Complex64::new(re, im))
}

fn cmd_integrate(flags: &Flags) -> Result<String, CliError> {
    let kv = load_config(flags)?;
    let cfg = insertion_config_from(&kv)?;
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let kappa: f64 = kv
        .get("kappa")
        .ok_or_else(|| CliError::Usage("config field 'kappa' is required".into()))?
        .parse()
        .map_err(|_| CliError::Usage("config field 'kappa' must be numeric".into()))?;
    // numeric weight table: lambda a=<1-based> p=<mode> i=<cartan> v=<value>
    let mut lambda: Vec<Vec<Vec<f64>>> = cfg
        .primaries
        .iter()
        .map(|p| vec![vec![0.0; cfg.alg.rank]; p.lambda.order + 1])
        .collect();
    for entry in kv.get_all("lambda") {
        let f = KvConfig::fields(entry);
        let get = |k: &str| -> Result<f64, CliError> {
            f.get(k)
                .ok_or_else(|| {
                    CliError::Usage(format!("config field 'lambda': missing {k}= in '{entry}'"))
                })?
                .parse()
                .map_err(|_| CliError::Usage(format!("config field 'lambda': bad {k}=")))
        };
        let a = get("a")? as usize;
        let p = get("p")? as usize;
        let i = get("i")? as usize;
        let v = get("v")?;
        if a == 0 || a > lambda.len() {
            return Err(CliError::Usage(format!(
                "config field 'lambda': primary index a={a} out of range"
            )));
        }
        if p >= lambda[a - 1].len() || i == 0 || i > cfg.alg.rank {
            return Err(CliError::Usage(format!(
                "config field 'lambda': p={p} or i={i} out of range for primary {a}"
            )));
        }
        lambda[a - 1][p][i - 1] = v;
    }
    let weights = NumericWeights { kappa, lambda };

    let mut z = Vec::new();
    for entry in kv.get_all("point") {
        z.push(parse_complex(entry)?);
    }
    if z.len() != cfg.primaries.len() {
        return Err(CliError::Usage(format!(
            "config needs {} 'point' entries (one per primary), got {}",
            cfg.primaries.len(),
            z.len()
        )));
    }
    let mut cycles = Vec::new();
    for entry in kv.get_all("cycle") {
        let parts: Vec<&str> = entry.split_whitespace().collect();
        match parts.as_slice() {
            ["segment", from, to] => cycles.push(Cycle::Segment {
                from: parse_complex(from)?,
                to: parse_complex(to)?,
            }),
            ["ray", from, angle] => cycles.push(Cycle::Ray {
                from: parse_complex(from)?,
                angle: angle
                    .parse()
                    .map_err(|_| CliError::Usage("config field 'cycle': bad ray angle".into()))?,
            }),
            _ => {
                return Err(CliError::Usage(format!(
                    "config field 'cycle': expected 'segment FROM TO' or 'ray FROM ANGLE', \
                     got '{entry}'"
                )))
            }
        }
    }
    let tol: f64 = kv
        .get("tolerance")
        .unwrap_or("1e-9")
        .parse()
        .map_err(|_| CliError::Usage("config field 'tolerance' must be numeric".into()))?;

    let result = integrate(&cfg, &weights, &z, &cycles, tol).map_err(|e| {
        use confluent_cft::correlators::IntegrateError as IE;
        match e {
            IE::NonConvergent { .. } => CliError::CheckFailed(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    })?;
    if format_of(flags)? == "json" {
        let v = json!({
            "value": {"re": result.value.re, "im": result.value.im},
            "error_estimate": result.error_estimate,
            "evaluations": result.evaluations,
        });
        Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
    } else {
        Ok(format!(
            "value = {} + {}i\nerror_estimate = {}\nevaluations = {}\n",
            result.value.re, result.value.im, result.error_estimate, result.evaluations
        ))
    }
}
