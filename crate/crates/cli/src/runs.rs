//! Single-shot command handlers: generate, saw, detect, stats, gw.

use crate::ModelArgs;
use hsbm_core::hypergraph::sample_hsbm;
use hsbm_core::io::{read_hypergraph, write_hypergraph, write_saw_matrix, SCHEMA_VERSION};
use hsbm_core::localstats::bfs_profile;
use hsbm_core::model::ModelParams;
use hsbm_core::{gwtree, localstats, saw, spectral};
use serde::Serialize;
use std::error::Error;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

type Outcome = Result<bool, Box<dyn Error>>;

/// JSON run-config record; the optional walk depth is carried for tools
/// that need one but is not used by generation itself.
#[derive(serde::Deserialize)]
struct ParamsConfig {
    n: usize,
    d: usize,
    a: f64,
    b: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    #[allow(dead_code)]
    l: Option<usize>,
}

pub fn generate(model: &ModelArgs, out: &Path) -> Outcome {
    let params = match &model.config {
        Some(path) => {
            let cfg: ParamsConfig = serde_json::from_reader(File::open(path)?)?;
            ModelParams::new(cfg.n, cfg.d, cfg.a, cfg.b, cfg.seed)?
        }
        None => ModelParams::new(
            model.n.expect("clap enforces --n without --config"),
            model.d,
            model.a.expect("clap enforces --a without --config"),
            model.b.expect("clap enforces --b without --config"),
            model.seed,
        )?,
    };
    let (h, spins) = sample_hsbm(&params)?;
    write_hypergraph(out, &h, &spins)?;
    eprintln!(
        "generated n={} d={} edges={} -> {}",
        h.n(),
        h.d(),
        h.num_edges(),
        out.display()
    );
    Ok(true)
}

pub fn saw(input: &Path, l: usize, out: &Path) -> Outcome {
    let (h, _) = read_hypergraph(input)?;
    let b = saw::saw_matrix(&h, l);
    write_saw_matrix(out, &b, l)?;
    eprintln!("B^({l}): n={} nnz={} -> {}", b.n(), b.nnz(), out.display());
    Ok(true)
}

#[derive(Serialize)]
struct DetectReport {
    schema: u32,
    n: usize,
    d: usize,
    l: usize,
    t: f64,
    seed: u64,
    eigenvalues: Vec<f64>,
    iterations: Vec<usize>,
    converged: Vec<bool>,
    zero_spectrum: bool,
    alignment_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alignment_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    overlap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_overlap: Option<f64>,
    labels: Vec<i8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_sweep: Option<Vec<(f64, f64)>>,
}

pub fn detect(
    input: &Path,
    l: usize,
    t: f64,
    use_truth: bool,
    t_sweep: bool,
    seed: u64,
    json_out: Option<&Path>,
) -> Outcome {
    let (h, spins) = read_hypergraph(input)?;
    let truth = use_truth.then_some(&spins);
    let res = spectral::detect(&h, l, t, truth, seed)?;
    let sweep = if t_sweep {
        if !use_truth {
            return Err("--t-sweep needs --truth".into());
        }
        let second = &res.eigenpairs[1.min(res.eigenpairs.len() - 1)];
        let mut grid = Vec::new();
        let mut tt = -2.0f64;
        while tt <= 2.0 + 1e-9 {
            let labels = spectral::estimate_labels(&second.vector, tt);
            grid.push((tt, spectral::overlap(&labels, &spins)?));
            tt += 0.25;
        }
        Some(grid)
    } else {
        None
    };
    let report = DetectReport {
        schema: SCHEMA_VERSION,
        n: h.n(),
        d: h.d(),
        l,
        t,
        seed,
        eigenvalues: res.eigenpairs.iter().map(|p| p.value).collect(),
        iterations: res.eigenpairs.iter().map(|p| p.iterations).collect(),
        converged: res.eigenpairs.iter().map(|p| p.converged).collect(),
        zero_spectrum: res.zero_spectrum,
        alignment_s: res.alignment_s,
        alignment_d: res.alignment_d,
        overlap: res.overlap,
        abs_overlap: res.overlap.map(f64::abs),
        labels: res.labels.as_slice().to_vec(),
        t_sweep: sweep,
    };
    if let Some(path) = json_out {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, &report)?;
        w.write_all(b"\n")?;
    }
    println!(
        "eigenvalues: {:?}",
        report
            .eigenvalues
            .iter()
            .map(|v| (v * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );
    println!("alignment_s: {:.4}", report.alignment_s);
    if let Some(ad) = report.alignment_d {
        println!("alignment_d: {ad:.4}");
    }
    if let Some(ov) = report.overlap {
        println!("overlap: {ov:.4} (|overlap| = {:.4})", ov.abs());
    }
    if let Some(grid) = &report.t_sweep {
        println!("t-sweep (t, overlap):");
        for (tt, ov) in grid {
            println!("  {tt:+.2}  {ov:+.4}");
        }
    }
    if report.zero_spectrum {
        println!("warning: B^({l}) is identically zero; detection degenerates");
    }
    Ok(true)
}

pub fn stats(input: &Path, l: usize, out: &Path, rates_ab: Option<(f64, f64)>) -> Outcome {
    let (h, spins) = read_hypergraph(input)?;
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "# schema={SCHEMA_VERSION} command=stats l={l}")?;
    let mut header = vec!["i".to_string()];
    header.extend((0..=l).map(|t| format!("S_{t}")));
    header.extend((0..=l).map(|t| format!("D_{t}")));
    header.push("cycle_count".to_string());
    writeln!(w, "{}", header.join(","))?;
    let mut profiles = Vec::with_capacity(h.n());
    for i in 0..h.n() {
        let p = bfs_profile(&h, &spins, i, l);
        let mut row = vec![i.to_string()];
        row.extend(p.s.iter().map(u64::to_string));
        row.extend(p.d.iter().map(i64::to_string));
        row.push(p.cycle_count.to_string());
        writeln!(w, "{}", row.join(","))?;
        profiles.push(p);
    }
    let census = localstats::tangle_census(&h, &spins, l);
    eprintln!(
        "profiles for n={} -> {} (tangled {}, l-tangle-free {})",
        h.n(),
        out.display(),
        census.tangled_count,
        census.l_tangle_free
    );
    if let Some((a, b)) = rates_ab {
        // logged diagnostics against the asymptotic scales; never asserted
        let params = ModelParams::new(h.n(), h.d(), a, b, 0)?;
        let rates = hsbm_core::model::derive_rates(&params)?;
        let logn = (h.n() as f64).ln();
        let tangle_scale = logn.powi(4) * rates.alpha.powi(2 * l as i32);
        eprintln!(
            "diagnostic: tangled {} vs log^4(n) alpha^(2l) = {:.1}",
            census.tangled_count, tangle_scale
        );
        for t in 0..=l {
            let mut normed: Vec<f64> = profiles
                .iter()
                .map(|p| localstats::quasi_residuals(p, &rates, l).s_resid_norm[t].abs())
                .collect();
            normed.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let median = normed[normed.len() / 2];
            eprintln!(
                "diagnostic: median |S_{t} - alpha^({t}-{l}) S_{l}| / alpha^({t}/2) = {median:.3} (log n = {logn:.2})"
            );
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct GwReport {
    schema: u32,
    a: f64,
    b: f64,
    d: usize,
    depth: usize,
    samples: usize,
    seed: u64,
    root_spin: i8,
    alpha: f64,
    beta: f64,
    above_kesten_stigum: bool,
    mean_m: Vec<f64>,
    se_m: Vec<f64>,
    var_m: Vec<f64>,
    mean_delta: Vec<f64>,
    se_delta: Vec<f64>,
    var_delta: Vec<f64>,
    est_e_delta_inf_sq: f64,
    se_e_delta_inf_sq: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    var_m_closed: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    var_delta_closed: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_estimate: Option<REstimateReport>,
}

#[derive(Serialize)]
struct REstimateReport {
    tau: f64,
    r_hat: f64,
    se: f64,
    r_at_tau_minus: f64,
    r_at_tau_plus: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn gw(
    a: f64,
    b: f64,
    d: usize,
    depth: usize,
    samples: usize,
    seed: u64,
    root_spin: i8,
    tau: Option<f64>,
    json_out: Option<&Path>,
) -> Outcome {
    let config = gwtree::GWConfig::new(a, b, d, root_spin, depth, seed)?;
    let stats = gwtree::martingale_stats(&config, samples);
    let (alpha, beta) = (config.alpha(), config.beta());
    let above = beta * beta > alpha;
    // closed-form variance references when the formulas apply
    let params_proxy = ModelParams::new(10 * d, d, a, b, seed);
    let (var_m_closed, var_delta_closed) =
        match params_proxy.and_then(|p| hsbm_core::model::derive_rates(&p)) {
            Ok(r) => (
                Some((0..=depth).map(|t| r.var_m_t(t as u32)).collect::<Vec<_>>()),
                above.then(|| {
                    (0..=depth)
                        .map(|t| r.var_delta_t(t as u32))
                        .collect::<Vec<_>>()
                }),
            ),
            Err(_) => (None, None),
        };
    let report = GwReport {
        schema: SCHEMA_VERSION,
        a,
        b,
        d,
        depth,
        samples,
        seed,
        root_spin,
        alpha,
        beta,
        above_kesten_stigum: above,
        mean_m: stats.mean_m.clone(),
        se_m: stats.se_m.clone(),
        var_m: stats.var_m.clone(),
        mean_delta: stats.mean_delta.clone(),
        se_delta: stats.se_delta.clone(),
        var_delta: stats.var_delta.clone(),
        est_e_delta_inf_sq: stats.est_e_delta_inf_sq,
        se_e_delta_inf_sq: stats.se_e_delta_inf_sq,
        var_m_closed,
        var_delta_closed,
        r_estimate: tau
            .map(|tau| -> Result<REstimateReport, hsbm_core::Error> {
                let est = gwtree::estimate_r(&config, tau, samples, depth)?;
                Ok(REstimateReport {
                    tau,
                    r_hat: est.r_hat,
                    se: est.se,
                    r_at_tau_minus: est.r_at_tau_minus,
                    r_at_tau_plus: est.r_at_tau_plus,
                })
            })
            .transpose()?,
    };
    if let Some(path) = json_out {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, &report)?;
        w.write_all(b"\n")?;
    }
    println!("alpha = {alpha}, beta = {beta}, above KS threshold: {above}");
    println!(
        "{:>3} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "t", "mean M", "se", "mean Dt", "se", "var M", "var Dt"
    );
    for t in 0..=depth {
        println!(
            "{t:>3} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            report.mean_m[t],
            report.se_m[t],
            report.mean_delta[t],
            report.se_delta[t],
            report.var_m[t],
            report.var_delta[t]
        );
    }
    println!(
        "E[Delta_{depth}^2] estimate: {:.5} +- {:.5}",
        report.est_e_delta_inf_sq, report.se_e_delta_inf_sq
    );
    if let Some(r) = &report.r_estimate {
        println!(
            "r-hat at tau = {}: {:.5} +- {:.5} (tau -1e-3: {:.5}, tau +1e-3: {:.5})",
            r.tau, r.r_hat, r.se, r.r_at_tau_minus, r.r_at_tau_plus
        );
    }
    Ok(true)
}
