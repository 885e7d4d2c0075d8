//! One function per subcommand. Each writes into an [`OutputDir`] and returns
//! a short JSON summary for the terminal.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use quso::amplitude::build_qae;
use quso::block::{build_ua, expected_block, extract_block, ua_layout, LcuPlan};
use quso::qaoa::{
    argmax, cost_landscape, evaluate, expectation_cost, grid, optimize, ExpectationMode,
    QaoaParams, QaoaSimulator, RunResult,
};
use quso::qsvt::{
    build_inversion_polynomial_with, epsilon_for_degree, solver_layout, LinearSolver, PhaseCache,
    PolyOptions,
};
use quso::sim::{CircuitStats, Register, RegisterLayout};
use quso::thermal::{
    bitstring, enumerate_costs, solve_direct, spectral_stats, Configuration, CostTable,
    ThermalNetwork,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{CostLayerMode, ExperimentConfig, LoadedConfig};
use crate::error::CliError;
use crate::output::{num, OutputDir};

/// Largest `k` accepted for the full cost layer on networks of four or more
/// nodes.
pub const FULL_MODE_MAX_K: usize = 4;

pub fn phase_cache(out: &OutputDir) -> PhaseCache {
    PhaseCache::new(out.root().join("phase_cache"))
}

/// `T̃` of every configuration, one row each.
pub fn cmd_solve(cfg: &LoadedConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let net = &cfg.network;
    let n = net.node_count();
    let mut columns = vec!["bitstring".to_string()];
    columns.extend((0..n).map(|i| format!("T{i}")));
    columns.push("residual".into());
    let mut rows = Vec::new();
    for x in net.configurations()? {
        let s = solve_direct(net, &x)?;
        let mut row = vec![x.to_string()];
        row.extend(s.temperatures.iter().map(|t| num(*t)));
        row.push(num(s.residual));
        rows.push(row);
    }
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    out.csv("solve.csv", &cols, &rows)?;
    Ok(json!({ "configurations": rows.len() }))
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockCheck {
    pub bitstring: String,
    pub max_abs_error: f64,
    pub encoded_sigma_min: f64,
}

/// Extracted `U_A` blocks against `C² A(x)/2` for every configuration.
pub fn block_checks(net: &ThermalNetwork) -> Result<Vec<BlockCheck>, CliError> {
    let layout = ua_layout(net);
    let ua = build_ua(net, &layout)?;
    let c2 = LcuPlan::from_network(net).c_lcu_sq();
    let configs: Vec<Configuration> = net.configurations()?.collect();
    configs
        .par_iter()
        .map(|x| {
            let got = extract_block(&ua, &layout, x.index())?;
            let want = expected_block(net, x)?;
            let mut err = 0.0f64;
            for (g, w) in got.iter().zip(want.iter()) {
                err = err.max((g - w).norm());
            }
            let stats = spectral_stats(net, x)?;
            Ok(BlockCheck {
                bitstring: x.to_string(),
                max_abs_error: err,
                encoded_sigma_min: stats.sigma_min * c2 / 2.0,
            })
        })
        .collect::<quso::error::Result<Vec<_>>>()
        .map_err(CliError::from)
}

pub fn cmd_block_verify(cfg: &LoadedConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let checks = block_checks(&cfg.network)?;
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| vec![c.bitstring.clone(), num(c.max_abs_error), num(c.encoded_sigma_min)])
        .collect();
    out.csv("block_verify.csv", &["bitstring", "max_abs_error", "encoded_sigma_min"], &rows)?;
    let worst = checks.iter().map(|c| c.max_abs_error).fold(0.0, f64::max);
    let tol = cfg.config.block_verify.tolerance;
    let summary = json!({
        "c_lcu_sq": LcuPlan::from_network(&cfg.network).c_lcu_sq(),
        "max_abs_error": worst,
        "tolerance": tol,
        "pass": worst <= tol,
    });
    out.json("block_verify_summary.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub mu: f64,
    pub epsilon: f64,
    pub degree: usize,
    /// Measured `c̃` per configuration.
    pub measured: Vec<f64>,
    pub target: Vec<f64>,
    pub delta: Vec<f64>,
}

impl SweepPoint {
    pub fn mean_delta(&self) -> f64 {
        self.delta.iter().sum::<f64>() / self.delta.len() as f64
    }

    pub fn std_delta(&self) -> f64 {
        let m = self.mean_delta();
        (self.delta.iter().map(|d| (d - m).powi(2)).sum::<f64>() / self.delta.len() as f64).sqrt()
    }
}

/// Runs the solver for one `(μ, ε)` and compares normalized costs.
pub fn sweep_point(
    net: &ThermalNetwork,
    target_node: usize,
    mu: f64,
    epsilon: f64,
    degree_cap: usize,
    cache: &PhaseCache,
) -> Result<SweepPoint, CliError> {
    let ctx = || format!("mu={mu}, epsilon={epsilon}");
    let opts = PolyOptions {
        degree_cap,
        ..PolyOptions::default()
    };
    let poly = build_inversion_polynomial_with(mu, epsilon, &opts).map_err(CliError::context(ctx()))?;
    let phases = cache.get_or_compute(&poly).map_err(CliError::context(ctx()))?;
    let layout = solver_layout(net);
    let solver = LinearSolver::new(net, &layout, &poly, &phases).map_err(CliError::context(ctx()))?;
    let measured = solver
        .measured_costs(target_node)
        .and_then(|t| t.normalized())
        .map_err(CliError::context(ctx()))?;
    let target = enumerate_costs(net, target_node, 1.0)?.normalized()?;
    let delta = measured
        .costs()
        .iter()
        .zip(target.costs())
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(SweepPoint {
        mu,
        epsilon,
        degree: poly.degree,
        measured: measured.costs().to_vec(),
        target: target.costs().to_vec(),
        delta,
    })
}

pub fn cmd_qsvt_sweep(cfg: &LoadedConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let c = &cfg.config;
    let cache = phase_cache(out);
    let grid: Vec<(f64, f64)> = c
        .qsvt
        .mu
        .iter()
        .flat_map(|&m| c.qsvt.epsilon.iter().map(move |&e| (m, e)))
        .collect();
    let points = grid
        .par_iter()
        .map(|&(mu, eps)| sweep_point(&cfg.network, c.target_node, mu, eps, c.qsvt.degree_cap, &cache))
        .collect::<Result<Vec<_>, _>>()?;
    let m = cfg.network.edge_count();
    let mut rows = Vec::new();
    let mut summary_rows = Vec::new();
    for p in &points {
        for x in 0..p.delta.len() {
            rows.push(vec![
                num(p.mu),
                num(p.epsilon),
                bitstring(x, m),
                num(p.measured[x]),
                num(p.target[x]),
                num(p.delta[x]),
            ]);
        }
        summary_rows.push(vec![
            num(p.mu),
            num(p.epsilon),
            p.degree.to_string(),
            num(p.mean_delta()),
            num(p.std_delta()),
        ]);
    }
    out.csv(
        "qsvt_sweep.csv",
        &["mu", "epsilon", "bitstring", "c_tilde", "c_tilde_target", "delta"],
        &rows,
    )?;
    out.csv(
        "qsvt_summary.csv",
        &["mu", "epsilon", "degree", "mean_delta", "std_delta"],
        &summary_rows,
    )?;
    Ok(json!({ "points": points.len() }))
}

/// Cost table used by the optimizer: normalized, or scaled when configured.
pub fn qaoa_table(net: &ThermalNetwork, c: &ExperimentConfig) -> Result<CostTable, CliError> {
    let raw = enumerate_costs(net, c.target_node, 1.0)?;
    Ok(match c.qaoa.cost_scale {
        Some(s) => raw.affine(s, 0.0),
        None => raw.normalized()?,
    })
}

/// Simulator for one phase-register width (0 = exact oracle).
pub fn simulator_for(
    net: &ThermalNetwork,
    c: &ExperimentConfig,
    table: &CostTable,
    k: usize,
    cache: &PhaseCache,
) -> Result<QaoaSimulator, CliError> {
    if k == 0 {
        return Ok(QaoaSimulator::ideal(table.clone())?);
    }
    match c.qaoa.mode {
        CostLayerMode::Shortcut => Ok(QaoaSimulator::shortcut(table.clone(), k)?),
        CostLayerMode::Full => {
            if k > FULL_MODE_MAX_K && net.node_count() >= 4 {
                return Err(quso::error::QusoError::ResourceLimit(format!(
                    "full cost layer with k = {k} > {FULL_MODE_MAX_K} on a {}-node network",
                    net.node_count()
                ))
                .into());
            }
            let ctx = format!("full mode mu={}, epsilon={}", c.qaoa.full_mu, c.qaoa.full_epsilon);
            let poly = build_inversion_polynomial_with(c.qaoa.full_mu, c.qaoa.full_epsilon, &PolyOptions::default())
                .map_err(CliError::context(&ctx))?;
            let phases = cache.get_or_compute(&poly).map_err(CliError::context(&ctx))?;
            let layout = RegisterLayout::pipeline(net.edge_count(), k, net.node_count());
            let solver = LinearSolver::new(net, &layout, &poly, &phases)?;
            let amps = solver.measured_costs(c.target_node)?;
            let qae = build_qae(&solver.circuit, k, c.target_node, &layout)?;
            Ok(QaoaSimulator::full(table.clone(), qae, layout, 1.0 / amps.max())?)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QusoRun {
    pub depth: usize,
    pub phase_qubits: usize,
    pub delta: f64,
    pub sampled_cost: f64,
    pub result: RunResult,
}

fn delta_of(k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        (-(k as f64)).exp2()
    }
}

fn sampled(result: &RunResult, table: &CostTable, shots: usize, seed: u64) -> Result<f64, CliError> {
    if shots == 0 {
        return Ok(result.expectation);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(expectation_cost(
        &result.distribution,
        table,
        ExpectationMode::Sampled { shots },
        Some(&mut rng),
    )?)
}

/// Optimizes at `δ = 0` for every depth and, when `with_delta`, evaluates
/// the optimized angles for every configured `k > 0`.
pub fn quso_runs(
    net: &ThermalNetwork,
    c: &ExperimentConfig,
    cache: &PhaseCache,
    with_delta: bool,
) -> Result<Vec<QusoRun>, CliError> {
    let table = qaoa_table(net, c)?;
    let ideal = QaoaSimulator::ideal(table.clone())?;
    let mut opt = c.qaoa.optimizer.clone();
    opt.seed = c.seed;
    let baselines = c
        .qaoa
        .depths
        .par_iter()
        .map(|&p| {
            let init = QaoaParams::constant(p, c.qaoa.initial_angle)?;
            optimize(&ideal, &init, &opt).map_err(CliError::context(format!("depth {p}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut jobs: Vec<(usize, usize)> = Vec::new();
    for (i, _) in c.qaoa.depths.iter().enumerate() {
        jobs.push((i, 0));
        if with_delta {
            jobs.extend(c.qaoa.phase_qubits.iter().filter(|&&k| k > 0).map(|&k| (i, k)));
        }
    }
    let sims = {
        let mut ks: Vec<usize> = jobs.iter().map(|j| j.1).filter(|&k| k > 0).collect();
        ks.sort_unstable();
        ks.dedup();
        ks.into_iter()
            .map(|k| Ok((k, simulator_for(net, c, &table, k, cache)?)))
            .collect::<Result<std::collections::BTreeMap<_, _>, CliError>>()?
    };
    jobs.par_iter()
        .map(|&(i, k)| {
            let p = c.qaoa.depths[i];
            let result = if k == 0 {
                baselines[i].clone()
            } else {
                evaluate(&sims[&k], &baselines[i].params)?
            };
            let seed = c.seed ^ ((p as u64) << 32) ^ k as u64;
            Ok(QusoRun {
                depth: p,
                phase_qubits: k,
                delta: delta_of(k),
                sampled_cost: sampled(&result, &table, c.qaoa.shots, seed)?,
                result,
            })
        })
        .collect()
}

fn write_runs(out: &mut OutputDir, runs: &[QusoRun], m: usize) -> Result<(), CliError> {
    let mut ratio_rows = Vec::new();
    let mut trace_rows = Vec::new();
    let mut dist_rows = Vec::new();
    for r in runs {
        let res = &r.result;
        ratio_rows.push(vec![
            r.depth.to_string(),
            r.phase_qubits.to_string(),
            num(r.delta),
            num(res.expectation),
            num(r.sampled_cost),
            num(res.ratio),
            bitstring(argmax(&res.distribution), m),
            res.iterations.to_string(),
            res.converged.to_string(),
        ]);
        if r.phase_qubits == 0 {
            for (it, v) in res.trace.iter().enumerate() {
                trace_rows.push(vec![r.depth.to_string(), it.to_string(), num(*v)]);
            }
        }
        for (rank, e) in res.ranked.iter().enumerate() {
            dist_rows.push(vec![
                r.depth.to_string(),
                r.phase_qubits.to_string(),
                rank.to_string(),
                e.bitstring.clone(),
                num(e.cost),
                num(e.probability),
            ]);
        }
        out.json(&format!("run_p{}_k{}.json", r.depth, r.phase_qubits), r)?;
    }
    out.csv(
        "ratios.csv",
        &[
            "depth",
            "phase_qubits",
            "delta",
            "expectation",
            "sampled_cost",
            "ratio",
            "argmax",
            "iterations",
            "converged",
        ],
        &ratio_rows,
    )?;
    out.csv("traces.csv", &["depth", "iteration", "cost"], &trace_rows)?;
    out.csv(
        "distributions.csv",
        &["depth", "phase_qubits", "rank", "bitstring", "cost", "probability"],
        &dist_rows,
    )?;
    Ok(())
}

pub fn cmd_qaoa(cfg: &LoadedConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let cache = phase_cache(out);
    let runs = quso_runs(&cfg.network, &cfg.config, &cache, false)?;
    write_runs(out, &runs, cfg.network.edge_count())?;
    Ok(json!({
        "ratios": runs.iter().map(|r| json!({"depth": r.depth, "ratio": r.result.ratio})).collect::<Vec<_>>()
    }))
}

pub fn cmd_quso(cfg: &LoadedConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let cache = phase_cache(out);
    let runs = quso_runs(&cfg.network, &cfg.config, &cache, true)?;
    write_runs(out, &runs, cfg.network.edge_count())?;
    write_landscapes(cfg, out, &cache)?;
    Ok(json!({
        "ratios": runs
            .iter()
            .map(|r| json!({"depth": r.depth, "phase_qubits": r.phase_qubits, "ratio": r.result.ratio}))
            .collect::<Vec<_>>()
    }))
}

/// Depth-one landscape on the configured grid, rows over `γ`.
pub fn landscape(
    sim: &QaoaSimulator,
    gammas: &[f64],
    betas: &[f64],
) -> Result<Vec<Vec<f64>>, CliError> {
    gammas
        .par_iter()
        .map(|&g| Ok(cost_landscape(sim, &[g], betas)?.remove(0)))
        .collect()
}

fn write_landscapes(cfg: &LoadedConfig, out: &mut OutputDir, cache: &PhaseCache) -> Result<usize, CliError> {
    let c = &cfg.config;
    let l = &c.landscape;
    let gammas = grid(l.gamma_range[0], l.gamma_range[1], l.points);
    let betas = grid(l.beta_range[0], l.beta_range[1], l.points);
    let table = qaoa_table(&cfg.network, c)?;
    for &k in &l.phase_qubits {
        let sim = simulator_for(&cfg.network, c, &table, k, cache)?;
        let values = landscape(&sim, &gammas, &betas)?;
        let mut rows = Vec::with_capacity(gammas.len() * betas.len());
        for (i, g) in gammas.iter().enumerate() {
            for (j, b) in betas.iter().enumerate() {
                rows.push(vec![num(*g), num(*b), num(values[i][j])]);
            }
        }
        out.csv(&format!("landscape_k{k}.csv"), &["gamma", "beta", "cost"], &rows)?;
    }
    Ok(l.phase_qubits.len())
}

pub fn cmd_landscape(cfg: &LoadedConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let cache = phase_cache(out);
    let n = write_landscapes(cfg, out, &cache)?;
    Ok(json!({ "landscapes": n }))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingPoint {
    pub nodes: usize,
    pub edges: usize,
    pub gates: u64,
    pub decomposed: u64,
    pub fitted: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    /// `a` in `decomposed ≈ a N log2 N`.
    pub coefficient: f64,
    pub max_relative_deviation: f64,
    pub points: Vec<ScalingPoint>,
}

/// Least-squares fit of decomposed `U_A` counts on ring networks to
/// `a N log2 N`.
pub fn lcu_scaling(nodes: &[usize]) -> Result<ScalingFit, CliError> {
    let mut raw = Vec::new();
    for &n in nodes {
        let net = ThermalNetwork::ring(n, 5e-3, 1e-2, 100.0)?;
        let stats = build_ua(&net, &ua_layout(&net))?.stats();
        raw.push((n, net.edge_count(), stats));
    }
    let f = |n: usize| n as f64 * (n as f64).log2();
    let num_: f64 = raw.iter().map(|(n, _, s)| s.decomposed as f64 * f(*n)).sum();
    let den: f64 = raw.iter().map(|(n, _, _)| f(*n) * f(*n)).sum();
    let a = num_ / den;
    let points: Vec<ScalingPoint> = raw
        .into_iter()
        .map(|(n, m, s)| {
            let fitted = a * f(n);
            ScalingPoint {
                nodes: n,
                edges: m,
                gates: s.gates,
                decomposed: s.decomposed,
                fitted,
                relative_deviation: (s.decomposed as f64 - fitted).abs() / fitted,
            }
        })
        .collect();
    Ok(ScalingFit {
        coefficient: a,
        max_relative_deviation: points.iter().map(|p| p.relative_deviation).fold(0.0, f64::max),
        points,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ResourceReport {
    pub note: String,
    pub registers: Vec<Register>,
    pub qubits: usize,
    pub mu: f64,
    pub epsilon: f64,
    pub degree: usize,
    pub depth: usize,
    pub phase_qubits: usize,
    pub block_encoding: CircuitStats,
    pub solver: CircuitStats,
    pub qae: CircuitStats,
    /// Amplitude estimation with one more phase qubit.
    pub qae_next: CircuitStats,
    pub qae_growth: f64,
    pub qaoa: CircuitStats,
    pub lcu_scaling: ScalingFit,
}

pub fn resource_report(net: &ThermalNetwork, c: &ExperimentConfig, cache: &PhaseCache) -> Result<ResourceReport, CliError> {
    let r = &c.resources;
    let epsilon = match (r.epsilon, r.degree) {
        (Some(e), _) => e,
        (None, Some(d)) => epsilon_for_degree(r.mu, d).map_err(CliError::context(format!("degree {d}")))?,
        (None, None) => return Err(CliError::Config("resources needs `degree` or `epsilon`".into())),
    };
    let ctx = format!("mu={}, epsilon={epsilon}", r.mu);
    let poly = build_inversion_polynomial_with(r.mu, epsilon, &PolyOptions::default()).map_err(CliError::context(&ctx))?;
    let phases = cache.get_or_compute(&poly).map_err(CliError::context(&ctx))?;
    let build = |k: usize| -> Result<(RegisterLayout, LinearSolver, quso::sim::Circuit), CliError> {
        let layout = RegisterLayout::pipeline(net.edge_count(), k, net.node_count());
        let solver = LinearSolver::new(net, &layout, &poly, &phases)?;
        let qae = build_qae(&solver.circuit, k, c.target_node, &layout)?;
        Ok((layout, solver, qae))
    };
    let (layout, solver, qae) = build(r.phase_qubits)?;
    let (_, _, qae_next) = build(r.phase_qubits + 1)?;
    let table = enumerate_costs(net, c.target_node, 1.0)?.normalized()?;
    let sim = QaoaSimulator::full(table, qae.clone(), layout.clone(), 1.0)?;
    let qaoa = sim.circuit(&QaoaParams::constant(r.depth, c.qaoa.initial_angle)?)?.stats();
    let qae_stats = qae.stats();
    let qae_next_stats = qae_next.stats();
    Ok(ResourceReport {
        note: "Gate counts depend on the gate set and decomposition convention; they are \
               not comparable to counts produced by other toolchains."
            .into(),
        registers: layout.registers().to_vec(),
        qubits: layout.total_qubits(),
        mu: r.mu,
        epsilon,
        degree: poly.degree,
        depth: r.depth,
        phase_qubits: r.phase_qubits,
        block_encoding: solver.ua.stats(),
        solver: solver.circuit.stats(),
        qae_growth: qae_next_stats.gates as f64 / qae_stats.gates as f64,
        qae: qae_stats,
        qae_next: qae_next_stats,
        qaoa,
        lcu_scaling: lcu_scaling(&r.scaling_nodes)?,
    })
}

pub fn cmd_resources(cfg: &LoadedConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let cache = phase_cache(out);
    let report = resource_report(&cfg.network, &cfg.config, &cache)?;
    out.json("resources.json", &report)?;
    Ok(json!({
        "qubits": report.qubits,
        "degree": report.degree,
        "qaoa_gates": report.qaoa.gates,
        "qaoa_decomposed": report.qaoa.decomposed,
        "lcu_fit_max_deviation": report.lcu_scaling.max_relative_deviation,
    }))
}
