use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::ops::{build_hamiltonian, collective_expectations, C64};
use super::{PulseTrain, SpinCluster};
use crate::series::TimeSeries;
use crate::{Error, Result};

/// Work budget for a simulation, in rough floating-point operations.
#[derive(Clone, Copy, Debug)]
pub struct SimOptions {
    pub budget: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { budget: 5e11 }
    }
}

fn check_budget(cost: f64, opts: &SimOptions) -> Result<()> {
    if cost > opts.budget {
        return Err(Error::BudgetExceeded { cost, budget: opts.budget });
    }
    Ok(())
}

/// Stroboscopic collective magnetisation normalised by its initial x value (n/2).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimTrace {
    pub times: Vec<f64>,
    pub mx: Vec<f64>,
    pub my: Vec<f64>,
    pub mz: Vec<f64>,
}

impl SimTrace {
    fn push(&mut self, t: f64, n: usize, psi: &DVector<C64>) {
        let e = collective_expectations(n, psi);
        let norm = n as f64 / 2.0;
        self.times.push(t);
        self.mx.push(e[0] / norm);
        self.my.push(e[1] / norm);
        self.mz.push(e[2] / norm);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Transverse magnitude `sqrt(mx^2 + my^2)` per sample.
    pub fn mxy(&self) -> Vec<f64> {
        self.mx.iter().zip(&self.my).map(|(x, y)| x.hypot(*y)).collect()
    }

    pub fn mxy_series(&self) -> Result<TimeSeries> {
        TimeSeries::new(self.times.clone(), self.mxy())
    }

    pub fn mx_series(&self) -> Result<TimeSeries> {
        TimeSeries::new(self.times.clone(), self.mx.clone())
    }

    /// Sample-wise mean of traces on a common time axis.
    pub fn average(traces: &[SimTrace]) -> Result<SimTrace> {
        let first = traces.first().ok_or_else(|| Error::invalid("nothing to average"))?;
        if traces.iter().any(|t| t.times != first.times) {
            return Err(Error::invalid("traces have different time axes"));
        }
        let k = traces.len() as f64;
        let avg = |f: fn(&SimTrace) -> &Vec<f64>| {
            (0..first.len()).map(|i| traces.iter().map(|t| f(t)[i]).sum::<f64>() / k).collect()
        };
        Ok(SimTrace { times: first.times.clone(), mx: avg(|t| &t.mx), my: avg(|t| &t.my), mz: avg(|t| &t.mz) })
    }
}

/// `exp(-i H t)` from the eigendecomposition of a real symmetric `H`.
pub fn segment_propagator(h: &DMatrix<f64>, t: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    propagator_from_eigen(&eig, t)
}

fn propagator_from_eigen(eig: &SymmetricEigen<f64, nalgebra::Dyn>, t: f64) -> DMatrix<C64> {
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let mut vp = v.clone();
    for (j, e) in eig.eigenvalues.iter().enumerate() {
        let ph = C64::from_polar(1.0, -e * t);
        for i in 0..vp.nrows() {
            vp[(i, j)] *= ph;
        }
    }
    vp * v.transpose()
}

/// One-period propagator `U = U_free U_pulse` (pulse first, then the gap).
#[derive(Clone, Debug)]
pub struct FloquetPropagator {
    pub n: usize,
    pub u_period: DMatrix<C64>,
    /// `|U^dagger U - 1|_F`
    pub unitarity_error: f64,
}

impl FloquetPropagator {
    pub fn new(cluster: &SpinCluster, train: &PulseTrain) -> Result<Self> {
        train.validate()?;
        let hp = build_hamiltonian(cluster, train.omega_x, train.delta_omega)?;
        let hf = build_hamiltonian(cluster, 0.0, train.delta_omega)?;
        let up = segment_propagator(&hp, train.t_p);
        let uf = segment_propagator(&hf, train.tau_gap);
        let u = uf * up;
        let d = u.nrows();
        let unitarity_error = (u.adjoint() * &u - DMatrix::<C64>::identity(d, d)).norm();
        Ok(FloquetPropagator { n: cluster.n(), u_period: u, unitarity_error })
    }
}

/// Product state with every spin along +x.
pub fn initial_x_state(n: usize) -> DVector<C64> {
    let d = 1usize << n;
    DVector::from_element(d, C64::new((d as f64).powf(-0.5), 0.0))
}

fn setup_cost(d: f64) -> f64 {
    // two eigendecompositions and three dense complex products
    2.0 * 10.0 * d.powi(3) + 3.0 * 8.0 * d.powi(3)
}

/// Stroboscopic record at t = 0 and at the end of each gap, by exact propagation.
pub fn evolve_train(cluster: &SpinCluster, train: &PulseTrain, opts: &SimOptions) -> Result<SimTrace> {
    train.validate()?;
    let d = (1usize << cluster.n()) as f64;
    check_budget(setup_cost(d) + train.n_pulses as f64 * 8.0 * d * d, opts)?;
    let fp = FloquetPropagator::new(cluster, train)?;
    let mut psi = initial_x_state(cluster.n());
    let mut out = SimTrace::default();
    out.push(0.0, cluster.n(), &psi);
    for k in 1..=train.n_pulses {
        psi = &fp.u_period * psi;
        out.push(k as f64 * train.period(), cluster.n(), &psi);
    }
    Ok(out)
}

/// As [`evolve_train`], but the offset in period `k` is `delta_omega + offset(t_k)` with
/// `t_k` the start of that period. Propagators are rebuilt every period.
pub fn evolve_train_modulated(
    cluster: &SpinCluster,
    train: &PulseTrain,
    offset: impl Fn(f64) -> f64,
    opts: &SimOptions,
) -> Result<SimTrace> {
    train.validate()?;
    let d = (1usize << cluster.n()) as f64;
    check_budget(train.n_pulses as f64 * (setup_cost(d) + 8.0 * d * d), opts)?;
    let mut psi = initial_x_state(cluster.n());
    let mut out = SimTrace::default();
    out.push(0.0, cluster.n(), &psi);
    for k in 1..=train.n_pulses {
        let t0 = (k - 1) as f64 * train.period();
        let tr = PulseTrain { delta_omega: train.delta_omega + offset(t0), ..*train };
        let fp = FloquetPropagator::new(cluster, &tr)?;
        psi = &fp.u_period * psi;
        out.push(k as f64 * train.period(), cluster.n(), &psi);
    }
    Ok(out)
}

/// Free evolution under offset + dipolar terms, sampled every `dt` for `n_steps` steps.
pub fn evolve_free(cluster: &SpinCluster, delta_omega: f64, dt: f64, n_steps: usize, opts: &SimOptions) -> Result<SimTrace> {
    if !(dt > 0.0) || n_steps < 1 {
        return Err(Error::invalid("need dt > 0 and n_steps >= 1"));
    }
    let d = (1usize << cluster.n()) as f64;
    check_budget(setup_cost(d) / 2.0 + n_steps as f64 * 8.0 * d * d, opts)?;
    let u = segment_propagator(&build_hamiltonian(cluster, 0.0, delta_omega)?, dt);
    let mut psi = initial_x_state(cluster.n());
    let mut out = SimTrace::default();
    out.push(0.0, cluster.n(), &psi);
    for k in 1..=n_steps {
        psi = &u * psi;
        out.push(k as f64 * dt, cluster.n(), &psi);
    }
    Ok(out)
}
