//! QAOA outer loop over a configuration register `c`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amplitude::{full_cost_layer, ideal_cost_layer, Shortcut};
use crate::error::{QusoError, Result};
use crate::sim::{Circuit, Gate, RegisterLayout, Routine, StateVector};
use crate::thermal::{bitstring, CostTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(QusoError::InvalidArgument(format!(
                "need equal non-empty gamma and beta sequences, got {} and {}",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(Self { gammas, betas })
    }

    /// Depth `p` with every angle set to `value`.
    pub fn constant(p: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; p], vec![value; p])
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    fn flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    fn from_flat(v: &[f64]) -> Self {
        let p = v.len() / 2;
        Self {
            gammas: v[..p].to_vec(),
            betas: v[p..].to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpectationMode {
    Exact,
    Sampled { shots: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    /// Stop once `|Δ⟨H⟩|` between iterations drops below this.
    pub threshold: f64,
    pub max_iterations: usize,
    /// Central finite-difference step for gradients.
    pub fd_step: f64,
    pub mode: ExpectationMode,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            momentum: 0.9,
            threshold: 1e-5,
            max_iterations: 500,
            fd_step: 1e-4,
            mode: ExpectationMode::Exact,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(QusoError::InvalidArgument("threshold must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(QusoError::InvalidArgument(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.learning_rate > 0.0 && self.fd_step > 0.0) {
            return Err(QusoError::InvalidArgument(
                "learning rate and finite-difference step must be positive".into(),
            ));
        }
        if let ExpectationMode::Sampled { shots: 0 } = self.mode {
            return Err(QusoError::InvalidArgument("sampled mode needs shots > 0".into()));
        }
        Ok(())
    }
}

/// `U_M(β) = e^{iβX}` on every configuration qubit.
pub fn build_mixer(beta: f64, c: &[usize]) -> Vec<Gate> {
    c.iter()
        .map(|&q| Gate::rotx(q, beta).tagged(Routine::Mixer))
        .collect()
}

#[derive(Debug, Clone)]
enum Backend {
    /// Diagonal `e^{-iγ c(x)}` on `c` alone (δ = 0).
    Ideal,
    Shortcut(Shortcut),
    /// Amplitude-estimation circuit `qae` with `γ` multiplied by `gamma_scale`.
    Full {
        qae: Circuit,
        k: usize,
        gamma_scale: f64,
    },
}

/// Builds and runs QAOA circuits for one cost table.
#[derive(Debug, Clone)]
pub struct QaoaSimulator {
    table: CostTable,
    layout: RegisterLayout,
    backend: Backend,
}

impl QaoaSimulator {
    /// Exact phase oracle from the table.
    pub fn ideal(table: CostTable) -> Result<Self> {
        let layout = RegisterLayout::new(&[("c", table.edge_count())])?;
        Ok(Self {
            table,
            layout,
            backend: Backend::Ideal,
        })
    }

    /// Cost layer through amplitude estimation with `k` phase qubits,
    /// shortcut preparation. Table entries must lie in `[0, 1]`.
    pub fn shortcut(table: CostTable, k: usize) -> Result<Self> {
        let sc = Shortcut::new(&table, k)?;
        Ok(Self {
            layout: sc.layout().clone(),
            table,
            backend: Backend::Shortcut(sc),
        })
    }

    /// Complete cost layer `QAE† QPA QAE` on a pipeline layout. Every `γ` is
    /// multiplied by `gamma_scale` before it reaches the phase application,
    /// so that a table holding `c(x)/s` pairs with `gamma_scale = 1/s`.
    pub fn full(table: CostTable, qae: Circuit, layout: RegisterLayout, gamma_scale: f64) -> Result<Self> {
        let k = layout.width("p")?;
        if layout.width("c")? != table.edge_count() {
            return Err(QusoError::InvalidArgument(
                "configuration register and cost table disagree".into(),
            ));
        }
        if qae.num_qubits() != layout.total_qubits() {
            return Err(QusoError::InvalidArgument(
                "amplitude-estimation circuit does not match the layout".into(),
            ));
        }
        Ok(Self {
            table,
            layout,
            backend: Backend::Full {
                qae,
                k,
                gamma_scale,
            },
        })
    }

    /// `k = 0` selects the exact oracle.
    pub fn with_phase_qubits(table: CostTable, k: usize) -> Result<Self> {
        if k == 0 {
            Self::ideal(table)
        } else {
            Self::shortcut(table, k)
        }
    }

    pub fn table(&self) -> &CostTable {
        &self.table
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn phase_qubits(&self) -> usize {
        match &self.backend {
            Backend::Ideal => 0,
            Backend::Shortcut(sc) => sc.k(),
            Backend::Full { k, .. } => *k,
        }
    }

    pub fn cost_layer(&self, gamma: f64) -> Result<Circuit> {
        let c = self.layout.qubits("c")?;
        match &self.backend {
            Backend::Ideal => Ok(Circuit::from_gates(
                self.layout.total_qubits(),
                vec![ideal_cost_layer(&self.table, gamma, &c)?],
            )),
            Backend::Shortcut(sc) => sc.cost_layer(gamma),
            Backend::Full {
                qae, gamma_scale, ..
            } => full_cost_layer(qae, gamma * gamma_scale, &self.layout),
        }
    }

    pub fn circuit(&self, params: &QaoaParams) -> Result<Circuit> {
        let c = self.layout.qubits("c")?;
        let mut circ = Circuit::new(self.layout.total_qubits());
        circ.extend(c.iter().map(|&q| Gate::h(q).tagged(Routine::Mixer)));
        for (g, b) in params.gammas.iter().zip(&params.betas) {
            circ.append(&self.cost_layer(*g)?);
            circ.extend(build_mixer(*b, &c));
        }
        Ok(circ)
    }

    pub fn state(&self, params: &QaoaParams) -> Result<StateVector> {
        let mut s = StateVector::zero(self.layout.clone())?;
        s.apply_circuit(&self.circuit(params)?)?;
        Ok(s)
    }

    /// Marginal `P(x)` of the configuration register.
    pub fn distribution(&self, params: &QaoaParams) -> Result<Vec<f64>> {
        self.state(params)?.register_distribution("c")
    }

    pub fn expectation(&self, params: &QaoaParams) -> Result<f64> {
        let e = expectation_cost(&self.distribution(params)?, &self.table, ExpectationMode::Exact, None)?;
        if !e.is_finite() {
            return Err(QusoError::NonFinite(format!(
                "expectation {e} at gammas {:?}, betas {:?}",
                params.gammas, params.betas
            )));
        }
        Ok(e)
    }
}

/// `Σ_x P(x) c(x)`, or the mean of `shots` table costs drawn from `P`.
pub fn expectation_cost(
    distribution: &[f64],
    table: &CostTable,
    mode: ExpectationMode,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<f64> {
    if distribution.len() != table.len() {
        return Err(QusoError::InvalidArgument(format!(
            "distribution has {} entries, cost table {}",
            distribution.len(),
            table.len()
        )));
    }
    let costs = table.costs();
    match mode {
        ExpectationMode::Exact => Ok(distribution.iter().zip(costs).map(|(p, c)| p * c).sum()),
        ExpectationMode::Sampled { shots } => {
            let rng = rng.ok_or_else(|| {
                QusoError::InvalidArgument("sampled expectation needs a generator".into())
            })?;
            let dist = WeightedIndex::new(distribution)
                .map_err(|e| QusoError::InvalidArgument(format!("bad distribution: {e}")))?;
            let total: f64 = (0..shots).map(|_| costs[dist.sample(rng)]).sum();
            Ok(total / shots as f64)
        }
    }
}

/// `r = (c_max - c)/(c_max - c_min)`; a constant table gives 1.
pub fn approximation_ratio(c_qaoa: f64, table: &CostTable) -> f64 {
    let (lo, hi) = (table.min(), table.max());
    if hi == lo {
        return 1.0;
    }
    (hi - c_qaoa) / (hi - lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub index: usize,
    pub bitstring: String,
    pub cost: f64,
    pub probability: f64,
}

/// Configurations by ascending cost, ties by index.
pub fn ranked_distribution(distribution: &[f64], table: &CostTable) -> Vec<RankedEntry> {
    let mut idx: Vec<usize> = (0..table.len()).collect();
    let costs = table.costs();
    idx.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    idx.into_iter()
        .map(|i| RankedEntry {
            index: i,
            bitstring: bitstring(i, table.edge_count()),
            cost: costs[i],
            probability: distribution.get(i).copied().unwrap_or(0.0),
        })
        .collect()
}

/// Index of the most probable configuration, lowest index on ties.
pub fn argmax(distribution: &[f64]) -> usize {
    let mut best = 0;
    for (i, p) in distribution.iter().enumerate() {
        if *p > distribution[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// `⟨H⟩` after each iteration, starting with the initial parameters.
    pub trace: Vec<f64>,
    pub params: QaoaParams,
    pub expectation: f64,
    pub distribution: Vec<f64>,
    pub ratio: f64,
    pub ranked: Vec<RankedEntry>,
    pub iterations: usize,
    pub converged: bool,
    pub phase_qubits: usize,
}

/// Distribution, ratio and ranking at fixed parameters.
pub fn evaluate(sim: &QaoaSimulator, params: &QaoaParams) -> Result<RunResult> {
    let distribution = sim.distribution(params)?;
    let expectation = expectation_cost(&distribution, sim.table(), ExpectationMode::Exact, None)?;
    Ok(RunResult {
        trace: vec![expectation],
        params: params.clone(),
        expectation,
        ratio: approximation_ratio(expectation, sim.table()),
        ranked: ranked_distribution(&distribution, sim.table()),
        distribution,
        iterations: 0,
        converged: true,
        phase_qubits: sim.phase_qubits(),
    })
}

/// Gradient descent with momentum on `(γ, β)`, central-difference
/// gradients of the exact expectation.
pub fn optimize(sim: &QaoaSimulator, init: &QaoaParams, cfg: &OptimizerConfig) -> Result<RunResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let record = |params: &QaoaParams, rng: &mut ChaCha8Rng| -> Result<f64> {
        match cfg.mode {
            ExpectationMode::Exact => sim.expectation(params),
            mode => expectation_cost(&sim.distribution(params)?, sim.table(), mode, Some(rng)),
        }
    };
    let mut x = init.flat();
    let mut velocity = vec![0.0; x.len()];
    let mut trace = vec![record(init, &mut rng)?];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        let mut grad = vec![0.0; x.len()];
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += cfg.fd_step;
            xm[i] -= cfg.fd_step;
            let fp = sim.expectation(&QaoaParams::from_flat(&xp))?;
            let fm = sim.expectation(&QaoaParams::from_flat(&xm))?;
            grad[i] = (fp - fm) / (2.0 * cfg.fd_step);
        }
        for i in 0..x.len() {
            velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * grad[i];
            x[i] += velocity[i];
        }
        iterations += 1;
        let cost = record(&QaoaParams::from_flat(&x), &mut rng)?;
        let prev = *trace.last().expect("trace starts non-empty");
        trace.push(cost);
        if (prev - cost).abs() < cfg.threshold {
            converged = true;
            break;
        }
    }
    let params = QaoaParams::from_flat(&x);
    let mut result = evaluate(sim, &params)?;
    result.trace = trace;
    result.iterations = iterations;
    result.converged = converged;
    Ok(result)
}

/// `⟨H⟩` at depth one on the grid `gammas × betas` (rows follow `gammas`).
pub fn cost_landscape(sim: &QaoaSimulator, gammas: &[f64], betas: &[f64]) -> Result<Vec<Vec<f64>>> {
    gammas
        .iter()
        .map(|&g| {
            betas
                .iter()
                .map(|&b| sim.expectation(&QaoaParams::new(vec![g], vec![b])?))
                .collect()
        })
        .collect()
}

/// `n` evenly spaced points on `[lo, hi)`.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn table() -> CostTable {
        CostTable::new(2, vec![0.4, 0.1, 0.9, 0.6]).unwrap()
    }

    #[test]
    fn mixer_rotation() {
        let layout = RegisterLayout::new(&[("c", 1)]).unwrap();
        let mut s = StateVector::zero(layout).unwrap();
        for g in build_mixer(FRAC_PI_4, &[0]) {
            s.apply(&g).unwrap();
        }
        let h = FRAC_PI_4.cos();
        assert!((s.amplitude(0) - C64::new(h, 0.0)).norm() < 1e-12);
        assert!((s.amplitude(1) - C64::new(0.0, h)).norm() < 1e-12);
    }

    #[test]
    fn plus_state_is_mixer_eigenstate() {
        let sim = QaoaSimulator::ideal(table()).unwrap();
        let p = QaoaParams::new(vec![0.0], vec![FRAC_PI_2]).unwrap();
        for v in sim.distribution(&p).unwrap() {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_expectation_on_basis_and_uniform() {
        let t = table();
        let e = expectation_cost(&[0.0, 0.0, 1.0, 0.0], &t, ExpectationMode::Exact, None).unwrap();
        assert_eq!(e, 0.9);
        let u = expectation_cost(&[0.25; 4], &t, ExpectationMode::Exact, None).unwrap();
        assert!((u - t.mean()).abs() < 1e-15);
        assert!(expectation_cost(&[1.0], &t, ExpectationMode::Exact, None).is_err());
    }

    #[test]
    fn ratio_and_ranking() {
        let t = table();
        assert_eq!(approximation_ratio(0.1, &t), 1.0);
        assert_eq!(approximation_ratio(0.9, &t), 0.0);
        let r = ranked_distribution(&[0.1, 0.2, 0.3, 0.4], &t);
        let order: Vec<usize> = r.iter().map(|e| e.index).collect();
        assert_eq!(order, vec![1, 0, 3, 2]);
        assert_eq!(r[0].bitstring, "10");
        let ties = CostTable::new(1, vec![0.5, 0.5]).unwrap();
        assert_eq!(ranked_distribution(&[0.5, 0.5], &ties)[0].index, 0);
    }

    #[test]
    fn config_checks() {
        assert!(QaoaParams::new(vec![0.1], vec![]).is_err());
        let bad = OptimizerConfig {
            momentum: 1.0,
            ..OptimizerConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn optimizer_lowers_cost() {
        let sim = QaoaSimulator::ideal(table()).unwrap();
        let init = QaoaParams::constant(1, 0.5).unwrap();
        let res = optimize(&sim, &init, &OptimizerConfig::default()).unwrap();
        assert!(res.expectation < res.trace[0]);
        assert!((res.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}
