//! One function per subcommand. Each fills in a [`Report`]; library errors propagate so the caller
//! can map them to exit codes.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ellchain::classical::PhasePoint;
use ellchain::freezing::{freeze, FrozenChain};
use ellchain::hybrid::{
    conjugation_oracle, conserved_drift, evolve, relative_coordinate_drift, HybridState,
};
use ellchain::linalg::{self, SpinMatrix};
use ellchain::modular::{act, build_eval_context, seed, EvalContext, FamilyBase, ModularWord};
use ellchain::rmatrix::{ModelParams, RKind};
use ellchain::verify::{self, Check};
use ellchain::{c64, C64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::{Case, Family, Format, Kind, Observable};
use crate::parse;
use crate::report::{cx, cx_list, Report};

pub enum Failure {
    Usage(String),
    Lib(ellchain::Error),
    Io(String),
}

impl From<ellchain::Error> for Failure {
    fn from(e: ellchain::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn rkind(k: Kind) -> RKind {
    match k {
        Kind::Vertex => RKind::Vertex,
        Kind::Face => RKind::Face,
    }
}

fn base(f: &Family) -> Result<(FamilyBase, ModularWord), Failure> {
    let b = FamilyBase {
        eta: parse::complex(&f.eta).map_err(usage)?,
        epsilon: parse::complex(&f.eps).map_err(usage)?,
        a: parse::complex_list(&f.a).map_err(usage)?,
        omega: parse::complex(&f.omega).map_err(usage)?,
    };
    Ok((b, f.b_word.parse()?))
}

fn context_json(ctx: &EvalContext) -> Value {
    let d = &ctx.data;
    let r = &ctx.report;
    json!({
        "B-word": ctx.word.to_string(),
        "x": cx_list(&d.x),
        "p": cx_list(&d.p),
        "eta": cx(d.eta),
        "epsilon": cx(d.epsilon),
        "tau": cx(d.tau),
        "a": cx_list(&d.a),
        "velocities": cx_list(&r.velocities),
        "v_minus1": cx(ctx.v_minus1),
        "spread": r.spread,
        "jerk": r.jerk,
        "complement_symmetry": r.complement_symmetry,
        "reflection_symmetry": r.reflection_symmetry,
        "scale": r.scale,
        "accepted": r.accepted,
    })
}

pub fn theta_check(rep: &mut Report, seed: u64, samples: usize) -> Outcome {
    if samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    rep.checks = verify::elliptic_suite(seed, samples)?;
    Ok(())
}

pub fn rmatrix_verify(
    rep: &mut Report,
    seed: u64,
    kind: Kind,
    r: usize,
    samples: usize,
) -> Outcome {
    if samples == 0 || r < 2 {
        return Err(usage("need --samples ≥ 1 and --r ≥ 2"));
    }
    rep.checks = verify::rmatrix_suite(rkind(kind), r, seed, samples)?;
    rep.checks
        .extend(verify::permutation_suite(rkind(kind), r, 4, seed)?);
    Ok(())
}

pub fn ops_verify(
    rep: &mut Report,
    seed: u64,
    case: Case,
    n: usize,
    r: usize,
    pairs: Option<&str>,
    samples: usize,
) -> Outcome {
    if n < 2 || samples == 0 {
        return Err(usage("need --N ≥ 2 and --samples ≥ 1"));
    }
    let kind = match case {
        Case::Scalar => RKind::ScalarTrivial,
        Case::Vertex => RKind::Vertex,
        Case::Face => RKind::Face,
    };
    let len = n as i32;
    let pairs = match pairs {
        Some(p) => parse::pairs(p).map_err(usage)?,
        None if kind == RKind::ScalarTrivial => {
            verify::all_pairs(&(-(len - 1)..=len).filter(|&k| k != 0).collect::<Vec<_>>())
        }
        None => verify::all_pairs(&[1, -1, 2]),
    };
    if let Some(&(a, b)) = pairs
        .iter()
        .find(|&&(a, b)| [a, b].iter().any(|&k| k == 0 || k.abs() > len))
    {
        return Err(usage(format!("pair ({a},{b}) is outside ±1..±{n}")));
    }
    rep.checks = vec![verify::probe_commutativity(
        kind, r, n, &pairs, seed, samples,
    )?];
    Ok(())
}

pub fn equilibrium(rep: &mut Report, family: &Family, tol: Option<f64>) -> Outcome {
    let (b, word) = base(family)?;
    let tol = tol.unwrap_or(1e-10);
    rep.checks = verify::equilibrium_suite(&b, family.n, &word, tol)?;
    // the context is built without a gate so a rejected point still gets its report
    let ctx = build_eval_context(&word, &b, family.n, f64::INFINITY)?;
    rep.extra.insert("equilibrium".into(), context_json(&ctx));
    Ok(())
}

/// Manifest written next to the saved hamiltonians.
#[derive(Serialize, Deserialize)]
struct Manifest {
    kind: Kind,
    r: usize,
    family: Family,
    flows: Vec<i32>,
    format: String,
}

fn matrix_json(m: &SpinMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| cx(m[(i, j)])).collect()))
            .collect(),
    )
}

fn matrix_from_json(v: &Value) -> Result<SpinMatrix, Failure> {
    let bad = || Failure::Io("malformed matrix in hamiltonians.json".into());
    let rows = v.as_array().ok_or_else(bad)?;
    let n = rows.len();
    let mut m = SpinMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == n).ok_or_else(bad)?;
        for (j, z) in row.iter().enumerate() {
            let pair: [f64; 2] = serde_json::from_value(z.clone()).map_err(|_| bad())?;
            m[(i, j)] = c64(pair[0], pair[1]);
        }
    }
    Ok(m)
}

fn flow_file(n: i32) -> String {
    format!("h_{n}.bin")
}

fn chain_context(
    kind: Kind,
    r: usize,
    family: &Family,
    flows: Option<&[i32]>,
) -> Result<FrozenChain, Failure> {
    let (b, word) = base(family)?;
    if r < 2 {
        return Err(usage("--r must be at least 2"));
    }
    let ctx = build_eval_context(&word, &b, family.n, 1e-9)?;
    let range = flows
        .map(<[i32]>::to_vec)
        .unwrap_or_else(|| verify::full_range(family.n));
    Ok(freeze(rkind(kind), r, &ctx, &range)?)
}

fn chain_extra(rep: &mut Report, chain: &FrozenChain) {
    rep.extra
        .insert("equilibrium".into(), context_json(&chain.context));
    let norms: BTreeMap<String, f64> = chain
        .hamiltonians
        .iter()
        .map(|(n, h)| (n.to_string(), linalg::frobenius(h)))
        .collect();
    rep.extra.insert("frobenius_norms".into(), json!(norms));
}

#[allow(clippy::too_many_arguments)]
pub fn chain_build(
    rep: &mut Report,
    seed: u64,
    kind: Kind,
    r: usize,
    family: &Family,
    n_range: Option<&str>,
    oracle: Option<bool>,
    out: Option<&Path>,
    format: Format,
) -> Outcome {
    let flows = n_range.map(parse::int_list).transpose().map_err(usage)?;
    let chain = chain_context(kind, r, family, flows.as_deref())?;
    let oracle = oracle.unwrap_or(family.n <= 4);
    rep.checks = verify::chain_suite(&chain, seed, oracle)?;
    chain_extra(rep, &chain);
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let matrix_format = if format == Format::Bin { "bin" } else { "json" };
        let manifest = Manifest {
            kind,
            r,
            family: family.clone(),
            flows: chain.hamiltonians.keys().copied().collect(),
            format: matrix_format.into(),
        };
        fs::write(
            dir.join("chain.json"),
            serde_json::to_string_pretty(&manifest).expect("manifest serialises"),
        )?;
        if format == Format::Bin {
            for (n, h) in &chain.hamiltonians {
                let mut w = BufWriter::new(File::create(dir.join(flow_file(*n)))?);
                linalg::write_bin(&mut w, h)?;
                w.flush()?;
            }
        } else {
            let list: Vec<Value> = chain
                .hamiltonians
                .iter()
                .map(|(n, h)| json!({"n": n, "dim": h.nrows(), "entries": matrix_json(h)}))
                .collect();
            fs::write(
                dir.join("hamiltonians.json"),
                serde_json::to_string(&json!({ "hamiltonians": list })).expect("serialises"),
            )?;
        }
    }
    Ok(())
}

fn load_chain(dir: &Path) -> Result<(Manifest, BTreeMap<i32, SpinMatrix>), Failure> {
    let text = fs::read_to_string(dir.join("chain.json"))
        .map_err(|e| Failure::Io(format!("{}: {e}", dir.join("chain.json").display())))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Failure::Io(format!("chain.json: {e}")))?;
    let mut saved = BTreeMap::new();
    if manifest.format == "bin" {
        for &n in &manifest.flows {
            let f = File::open(dir.join(flow_file(n)))?;
            saved.insert(n, linalg::read_bin(BufReader::new(f))?);
        }
    } else {
        let v: Value = serde_json::from_str(&fs::read_to_string(dir.join("hamiltonians.json"))?)
            .map_err(|e| Failure::Io(format!("hamiltonians.json: {e}")))?;
        for item in v["hamiltonians"].as_array().into_iter().flatten() {
            let n = item["n"]
                .as_i64()
                .ok_or_else(|| Failure::Io("hamiltonians.json: missing n".into()))?
                as i32;
            saved.insert(n, matrix_from_json(&item["entries"])?);
        }
    }
    Ok((manifest, saved))
}

pub fn chain_verify(rep: &mut Report, seed: u64, dir: &Path) -> Outcome {
    let (m, saved) = load_chain(dir)?;
    rep.params = json!({ "dir": dir, "saved": serde_json::to_value(&m).expect("manifest serialises"), "seed": seed });
    let mut chain = chain_context(m.kind, m.r, &m.family, Some(&m.flows))?;
    for n in &m.flows {
        let s = saved
            .get(n)
            .ok_or_else(|| Failure::Io(format!("no saved matrix for n = {n}")))?;
        let rebuilt = &chain.hamiltonians[n];
        if s.shape() != rebuilt.shape() {
            return Err(Failure::Io(format!("saved H_{n} has the wrong size")));
        }
        rep.checks.push(Check::below(
            format!("saved H_{n} against a fresh build"),
            linalg::rel_diff(s, rebuilt, 1e-12)?,
            1e-12,
            "reproducibility",
        ));
    }
    // every suite now runs on the saved matrices
    chain.hamiltonians = saved;
    rep.checks
        .extend(verify::chain_suite(&chain, seed, m.family.n <= 4)?);
    chain_extra(rep, &chain);
    Ok(())
}

pub fn chain_spectrum(
    rep: &mut Report,
    dir: &Path,
    flows: &str,
    tol: Option<f64>,
) -> Result<Vec<C64>, Failure> {
    let flows = parse::int_list(flows).map_err(usage)?;
    let (_, saved) = load_chain(dir)?;
    let mut sum: Option<SpinMatrix> = None;
    for n in &flows {
        let h = saved
            .get(n)
            .ok_or_else(|| usage(format!("H_{n} is not in {}", dir.display())))?;
        sum = Some(match sum {
            Some(s) => s + h,
            None => h.clone(),
        });
    }
    let sum = sum.ok_or_else(|| usage("--n lists no flows"))?;
    let mut ev = linalg::eigenvalues(&sum)?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let im = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    rep.checks.push(
        Check::below(
            "max |Im| of the spectrum",
            im,
            tol.unwrap_or(1e-8),
            "real-spectrum",
        )
        .informative(),
    );
    rep.extra.insert("eigenvalues".into(), cx_list(&ev));
    rep.extra.insert("max_abs".into(), json!(scale));
    Ok(ev)
}

pub struct HybridArgs<'a> {
    pub kind: Kind,
    pub r: usize,
    pub family: &'a Family,
    pub x0: Option<&'a str>,
    pub p0: Option<&'a str>,
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub observable: Observable,
    pub site: usize,
    pub state: usize,
}

pub fn hybrid_evolve(rep: &mut Report, a: &HybridArgs, out: Option<&Path>) -> Outcome {
    let out = out.ok_or_else(|| usage("hybrid evolve writes its trajectory to --out"))?;
    if a.r != 2 {
        return Err(usage("observables are Pauli matrices, so --r must be 2"));
    }
    let (b, word) = base(a.family)?;
    let n = a.family.n;
    let (params, pt, ctx) = match a.x0 {
        None => {
            if a.p0.is_some() {
                return Err(usage("--p0 needs --x0"));
            }
            let ctx = build_eval_context(&word, &b, n, 1e-9)?;
            let p = ctx.model_params(rkind(a.kind), a.r, c64(0.0, 0.0))?;
            (p, ctx.phase_point(), Some(ctx))
        }
        Some(x0) => {
            let d = act(&word, &seed(&b, n));
            let x = parse::complex_list(x0).map_err(usage)?;
            let p = match a.p0 {
                Some(p0) => parse::complex_list(p0).map_err(usage)?,
                None => vec![c64(0.0, 0.0); x.len()],
            };
            if x.len() != n || p.len() != n {
                return Err(usage(format!("--x0 and --p0 need {n} entries")));
            }
            let dyn_a = if a.kind == Kind::Face {
                d.a.clone()
            } else {
                Vec::new()
            };
            let params = ModelParams::new(
                rkind(a.kind),
                a.r,
                n,
                d.eta,
                d.epsilon,
                c64(0.0, 0.0),
                d.tau,
                dyn_a,
            )?;
            (params, PhasePoint::new(x, p)?, None)
        }
    };
    let k = match a.observable {
        Observable::X => 1,
        Observable::Y => 2,
        Observable::Z => 3,
    };
    let a0 =
        verify::site_observable(&linalg::pauli(k), a.site, n).map_err(|e| usage(e.to_string()))?;
    if a.state >= params.dim() {
        return Err(usage(format!("--state must be below {}", params.dim())));
    }
    let s0 = HybridState {
        pt,
        a: a0.clone(),
        t: 0.0,
    };
    let traj = evolve(&s0, &params, a.t_end, a.dt, a.sample_every)?;

    let mut w = BufWriter::new(File::create(out)?);
    let mut header = vec!["t".to_string()];
    for v in ["x", "p"] {
        for i in 1..=n {
            header.push(format!("{v}{i}_re"));
            header.push(format!("{v}{i}_im"));
        }
    }
    header.extend(["obs_re", "obs_im", "tr_a2_re", "tr_a2_im"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for s in &traj.states {
        let mut row = vec![format!("{:.17e}", s.t)];
        for z in s.pt.x.iter().chain(&s.pt.p) {
            row.push(format!("{:.17e}", z.re));
            row.push(format!("{:.17e}", z.im));
        }
        let e = s.a[(a.state, a.state)];
        row.push(format!("{:.17e}", e.re));
        row.push(format!("{:.17e}", e.im));
        let t2 = (&s.a * &s.a).trace();
        row.push(format!("{:.17e}", t2.re));
        row.push(format!("{:.17e}", t2.im));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;

    let cp = (&params).into();
    for (m, d) in conserved_drift(&traj, &cp)? {
        rep.checks.push(Check::below(
            format!("D_{m} drift"),
            d,
            1e-8,
            "liouville-integrability",
        ));
    }
    // H is not hermitian for complex parameters, so |A|_F is not conserved; the conjugation is
    // still a similarity and keeps Tr A²
    let norm0 = linalg::frobenius(&a0);
    let tr2 = |m: &SpinMatrix| (m * m).trace();
    let trace_drift = (tr2(&traj.last().a) - tr2(&a0)).norm() / (norm0 * norm0);
    rep.checks.push(Check::below(
        "Tr A^2 drift",
        trace_drift,
        1e-6,
        "hybrid-evolution",
    ));
    rep.checks.push(Check::below(
        "largest local error estimate",
        traj.max_local_error,
        1e-6,
        "rk4-step-control",
    ));
    if let Some(ctx) = &ctx {
        let chain = freeze(rkind(a.kind), a.r, ctx, &[1])?;
        let oracle = conjugation_oracle(&chain.hamiltonians[&1], &a0, traj.last().t);
        let dev = linalg::frobenius(&(&traj.last().a - &oracle)) / norm0;
        let v1 = ctx.velocity(1);
        let slope = traj
            .last()
            .pt
            .x
            .iter()
            .zip(&s0.pt.x)
            .map(|(e, s)| (e - s - v1 * traj.last().t).norm())
            .fold(0.0, f64::max);
        rep.checks.push(Check::below(
            "relative coordinates fixed",
            relative_coordinate_drift(&traj),
            1e-8,
            "stationary-equilibrium",
        ));
        rep.checks.push(Check::below(
            "x_i drift with slope v_1",
            slope,
            1e-8,
            "stationary-equilibrium",
        ));
        rep.checks.push(Check::below(
            "A(t_end) against exp(iHt) A exp(-iHt)",
            dev,
            1e-6,
            "hybrid-evolution",
        ));
        rep.extra.insert("equilibrium".into(), context_json(ctx));
    }
    rep.extra.insert("steps".into(), json!(traj.steps));
    rep.extra.insert("samples".into(), json!(traj.states.len()));
    rep.extra.insert("trajectory".into(), json!(out));
    Ok(())
}
