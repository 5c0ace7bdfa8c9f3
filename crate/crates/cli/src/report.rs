//! Report assembly and serialization for each subcommand.
//!
//! Every floating-point field is rounded to 12 significant digits before it
//! is serialized, so JSON and CSV carry identical values.

use rayon::prelude::*;
use serde::Serialize;
use teleclone::{
    build_rts, mc_run, reversibility_residual, structure_report, AnalyticFidelities, McConfig, Network64, Protocol64,
    ProtocolResult64, Role, Sender,
};

use crate::Failure;

/// A report in both output formats.
pub struct Rendered {
    pub json: String,
    pub csv: String,
}

/// Round to 12 significant digits. Non-finite values pass through and
/// negative zero becomes zero.
pub fn sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn to_json<S: Serialize>(doc: &S) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| Failure::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn to_csv<R: Serialize>(rows: &[R]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Internal(e.to_string()))
}

#[derive(Serialize)]
struct Parameters {
    n: usize,
    m: usize,
    r: f64,
    r_b: Option<f64>,
    mean_x: f64,
    mean_y: f64,
}

impl Parameters {
    fn new(p: &Protocol64, mean_x: f64, mean_y: f64) -> Self {
        let (n, m, r, r_b) = match *p {
            Protocol64::Symmetric { n, m, r } => (n, m, r, None),
            Protocol64::Asymmetric { r, r_b } => (1, 2, r, Some(sig(r_b))),
        };
        Parameters { n, m, r: sig(r), r_b, mean_x: sig(mean_x), mean_y: sig(mean_y) }
    }
}

fn rounded(a: AnalyticFidelities<f64>) -> AnalyticFidelities<f64> {
    match a {
        AnalyticFidelities::Symmetric { clone, anticlone } => {
            AnalyticFidelities::Symmetric { clone: sig(clone), anticlone: sig(anticlone) }
        }
        AnalyticFidelities::Asymmetric { bob, claire, dan } => {
            AnalyticFidelities::Asymmetric { bob: sig(bob), claire: sig(claire), dan: sig(dan) }
        }
    }
}

// ---- run -------------------------------------------------------------------

#[derive(Serialize)]
struct Gain {
    g_x: f64,
    g_p: f64,
}

#[derive(Serialize)]
struct Gains {
    clone: Gain,
    anticlone: Gain,
}

#[derive(Serialize)]
struct OutputReport {
    index: usize,
    source: String,
    fidelity: f64,
    analytic: f64,
    abs_diff: f64,
    variance_x: f64,
    variance_y: f64,
    mean_offset_x: f64,
    mean_offset_y: f64,
}

#[derive(Serialize)]
struct Residual {
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct RunReport {
    protocol: String,
    parameters: Parameters,
    sender: Sender,
    gains: Gains,
    clones: Vec<OutputReport>,
    anticlones: Vec<OutputReport>,
    analytic: AnalyticFidelities<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reversibility_residual: Option<Residual>,
}

#[derive(Serialize)]
struct RunCsvRow<'a> {
    role: Role,
    index: usize,
    source: &'a str,
    fidelity: f64,
    analytic: f64,
    abs_diff: f64,
    variance_x: f64,
    variance_y: f64,
    mean_offset_x: f64,
    mean_offset_y: f64,
}

pub fn run(protocol: &Protocol64, result: &ProtocolResult64) -> Result<Rendered, Failure> {
    let analytic = result.analytic()?;
    let outputs = |role: Role| -> Vec<OutputReport> {
        let (reports, sources) = match role {
            Role::Clone => (&result.clone_reports, &result.clone_sources),
            Role::Anticlone => (&result.anticlone_reports, &result.anticlone_sources),
        };
        reports
            .iter()
            .zip(sources)
            .enumerate()
            .map(|(i, (rep, src))| {
                let expected = analytic.expected(role, i);
                OutputReport {
                    index: i,
                    source: src.to_string(),
                    fidelity: sig(rep.value),
                    analytic: sig(expected),
                    abs_diff: sig((rep.value - expected).abs()),
                    variance_x: sig(rep.variance_x),
                    variance_y: sig(rep.variance_y),
                    mean_offset_x: sig(rep.mean_offset_x),
                    mean_offset_y: sig(rep.mean_offset_y),
                }
            })
            .collect()
    };
    let residual = if result.params.n == 1 && result.params.m == 2 {
        let (x, y) = reversibility_residual(result)?;
        Some(Residual { x: sig(x), y: sig(y) })
    } else {
        None
    };
    let gain = |g: &teleclone::GainSet<f64>| Gain { g_x: sig(g.g_x), g_p: sig(g.g_p) };
    let report = RunReport {
        protocol: protocol.name(),
        parameters: Parameters::new(protocol, result.input_mean.0, result.input_mean.1),
        sender: result.params.sender.clone(),
        gains: Gains { clone: gain(&result.clone_gains), anticlone: gain(&result.anticlone_gains) },
        clones: outputs(Role::Clone),
        anticlones: outputs(Role::Anticlone),
        analytic: rounded(analytic),
        reversibility_residual: residual,
    };

    let csv_rows: Vec<RunCsvRow> = [(Role::Clone, &report.clones), (Role::Anticlone, &report.anticlones)]
        .into_iter()
        .flat_map(|(role, rows)| {
            rows.iter().map(move |o| RunCsvRow {
                role,
                index: o.index,
                source: &o.source,
                fidelity: o.fidelity,
                analytic: o.analytic,
                abs_diff: o.abs_diff,
                variance_x: o.variance_x,
                variance_y: o.variance_y,
                mean_offset_x: o.mean_offset_x,
                mean_offset_y: o.mean_offset_y,
            })
        })
        .collect();
    Ok(Rendered { json: to_json(&report)?, csv: to_csv(&csv_rows)? })
}

// ---- sweep -----------------------------------------------------------------

#[derive(Serialize)]
struct SymmetricRow {
    index: usize,
    n: usize,
    m: usize,
    r: f64,
    clone_fidelity: f64,
    clone_analytic: f64,
    clone_abs_diff: f64,
    anticlone_fidelity: f64,
    anticlone_analytic: f64,
    anticlone_abs_diff: f64,
}

#[derive(Serialize)]
struct AsymmetricRow {
    index: usize,
    r: f64,
    r_b: f64,
    f_b: f64,
    f_b_analytic: f64,
    f_b_abs_diff: f64,
    f_c: f64,
    f_c_analytic: f64,
    f_c_abs_diff: f64,
    f_d: f64,
    f_d_analytic: f64,
    f_d_abs_diff: f64,
}

#[derive(Serialize)]
struct SweepReport<R> {
    protocol: String,
    parameter: &'static str,
    mean_x: f64,
    mean_y: f64,
    rows: Vec<R>,
}

/// Simulated value, closed form and the largest deviation over all outputs of `role`.
fn summarize(result: &ProtocolResult64, analytic: &AnalyticFidelities<f64>, role: Role, index: usize) -> [f64; 3] {
    let sims = match role {
        Role::Clone => result.fidelities_clone(),
        Role::Anticlone => result.fidelities_anticlone(),
    };
    let worst = sims
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - analytic.expected(role, i)).abs())
        .fold(0.0, f64::max);
    [sig(sims[index]), sig(analytic.expected(role, index)), sig(worst)]
}

fn single(result: &ProtocolResult64, analytic: &AnalyticFidelities<f64>, role: Role, index: usize) -> [f64; 3] {
    let sims = match role {
        Role::Clone => result.fidelities_clone(),
        Role::Anticlone => result.fidelities_anticlone(),
    };
    let expected = analytic.expected(role, index);
    [sig(sims[index]), sig(expected), sig((sims[index] - expected).abs())]
}

pub fn sweep(
    base: &Protocol64,
    over_rb: bool,
    points: &[Protocol64],
    mean_x: f64,
    mean_y: f64,
) -> Result<Rendered, Failure> {
    let parameter = if over_rb { "rb" } else { "r" };
    let evaluated: Vec<(Protocol64, ProtocolResult64, AnalyticFidelities<f64>)> = points
        .par_iter()
        .map(|p| {
            let result = p.run(mean_x, mean_y)?;
            let analytic = p.analytic()?;
            Ok((*p, result, analytic))
        })
        .collect::<Result<_, teleclone::Error>>()?;

    match base {
        Protocol64::Symmetric { .. } => {
            let rows: Vec<SymmetricRow> = evaluated
                .iter()
                .enumerate()
                .map(|(index, (p, result, analytic))| {
                    let Protocol64::Symmetric { n, m, r } = *p else { unreachable!() };
                    let [cf, ca, cd] = summarize(result, analytic, Role::Clone, 0);
                    let [af, aa, ad] = summarize(result, analytic, Role::Anticlone, 0);
                    SymmetricRow {
                        index,
                        n,
                        m,
                        r: sig(r),
                        clone_fidelity: cf,
                        clone_analytic: ca,
                        clone_abs_diff: cd,
                        anticlone_fidelity: af,
                        anticlone_analytic: aa,
                        anticlone_abs_diff: ad,
                    }
                })
                .collect();
            let csv = to_csv(&rows)?;
            let doc = SweepReport { protocol: base.name(), parameter, mean_x: sig(mean_x), mean_y: sig(mean_y), rows };
            Ok(Rendered { json: to_json(&doc)?, csv })
        }
        Protocol64::Asymmetric { .. } => {
            let rows: Vec<AsymmetricRow> = evaluated
                .iter()
                .enumerate()
                .map(|(index, (p, result, analytic))| {
                    let Protocol64::Asymmetric { r, r_b } = *p else { unreachable!() };
                    let [bf, ba, bd] = single(result, analytic, Role::Clone, 0);
                    let [cf, ca, cd] = single(result, analytic, Role::Clone, 1);
                    let [df, da, dd] = single(result, analytic, Role::Anticlone, 0);
                    AsymmetricRow {
                        index,
                        r: sig(r),
                        r_b: sig(r_b),
                        f_b: bf,
                        f_b_analytic: ba,
                        f_b_abs_diff: bd,
                        f_c: cf,
                        f_c_analytic: ca,
                        f_c_abs_diff: cd,
                        f_d: df,
                        f_d_analytic: da,
                        f_d_abs_diff: dd,
                    }
                })
                .collect();
            let csv = to_csv(&rows)?;
            let doc = SweepReport { protocol: base.name(), parameter, mean_x: sig(mean_x), mean_y: sig(mean_y), rows };
            Ok(Rendered { json: to_json(&doc)?, csv })
        }
    }
}

// ---- structure -------------------------------------------------------------

#[derive(Serialize)]
struct PairRow {
    a: String,
    b: String,
    relation: teleclone::PairRelation,
    duan_sum: f64,
    log_negativity: f64,
    pass: bool,
}

#[derive(Serialize)]
struct StructureDoc {
    m: usize,
    r: f64,
    all_pass: bool,
    pairs: Vec<PairRow>,
}

/// Returns the rendered report and whether every pair passed.
pub fn structure(m: usize, r: f64) -> Result<(Rendered, bool), Failure> {
    let mut net = Network64::new();
    let ts = build_rts(&mut net, m, r)?;
    let report = structure_report(&ts, &net)?;
    let pairs: Vec<PairRow> = report
        .pairs
        .iter()
        .map(|p| PairRow {
            a: p.a.to_string(),
            b: p.b.to_string(),
            relation: p.relation,
            duan_sum: sig(p.duan_sum),
            log_negativity: sig(p.log_negativity),
            pass: p.pass,
        })
        .collect();
    let all_pass = report.all_pass();
    let csv = to_csv(&pairs)?;
    let doc = StructureDoc { m, r: sig(r), all_pass, pairs };
    Ok((Rendered { json: to_json(&doc)?, csv }, all_pass))
}

// ---- oracle ----------------------------------------------------------------

#[derive(Serialize)]
struct OracleRow {
    role: Role,
    index: usize,
    target_x: f64,
    target_y: f64,
    exact_fidelity: f64,
    mc_fidelity: f64,
    stderr: f64,
    z_score: Option<f64>,
    mean_x: f64,
    mean_y: f64,
    var_x: f64,
    var_y: f64,
}

#[derive(Serialize)]
struct OracleDoc {
    protocol: String,
    parameters: Parameters,
    shots: u64,
    seed: u64,
    low_confidence: bool,
    max_abs_z: Option<f64>,
    outputs: Vec<OracleRow>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then(|| sig(x))
}

pub fn oracle(protocol: &Protocol64, mean_x: f64, mean_y: f64, shots: u64, seed: u64) -> Result<Rendered, Failure> {
    let cfg = McConfig::new(shots, seed)?;
    let outputs = mc_run(protocol, mean_x, mean_y, cfg)?;
    let rows: Vec<OracleRow> = outputs
        .iter()
        .map(|o| {
            let e = &o.estimate;
            OracleRow {
                role: o.role,
                index: o.index,
                target_x: sig(o.target.0),
                target_y: sig(o.target.1),
                exact_fidelity: sig(o.exact_fidelity),
                mc_fidelity: sig(e.fidelity),
                stderr: sig(e.stderr_fidelity),
                z_score: finite(e.z_score(o.exact_fidelity)),
                mean_x: sig(e.mean_x),
                mean_y: sig(e.mean_y),
                var_x: sig(e.var_x),
                var_y: sig(e.var_y),
            }
        })
        .collect();
    let max_abs_z = rows
        .iter()
        .map(|r| r.z_score.map(f64::abs))
        .try_fold(0.0, |acc: f64, z| z.map(|z| acc.max(z)));
    let csv = to_csv(&rows)?;
    let doc = OracleDoc {
        protocol: protocol.name(),
        parameters: Parameters::new(protocol, mean_x, mean_y),
        shots,
        seed,
        low_confidence: outputs.iter().any(|o| o.estimate.low_confidence),
        max_abs_z,
        outputs: rows,
    };
    Ok(Rendered { json: to_json(&doc)?, csv })
}
