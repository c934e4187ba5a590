use prethermal::laplace::io::{read_trace_bin, read_trace_csv, write_limap_csv, write_trace_bin, write_trace_csv};
use prethermal::laplace::{
    build_kernel, compress_kernel, forward_model, invert, invert_with, li_map, log_bin, nnls, one_over_e_lifetime,
    InvertOptions, ALPHA_SCALE,
};
use prethermal::series::{linspace, logspace};
use prethermal::siggen::{add_noise, synth_decay, DecayModel};
use prethermal::{Error, T2Grid, TimeSeries};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn two_exp(times: &[f64]) -> TimeSeries {
    synth_decay(&DecayModel::new(vec![(0.6, 0.5), (0.4, 8.0)], 0.0).unwrap(), times).unwrap()
}

/// Cyclic coordinate descent on the nonnegative quadratic program; converges to the unique optimum.
fn qp_oracle(a: &DMatrix<f64>, b: &DVector<f64>, lam2: f64, sweeps: usize) -> DVector<f64> {
    let h = a.transpose() * a + DMatrix::identity(a.ncols(), a.ncols()) * lam2;
    let g0 = a.transpose() * b;
    let mut x = DVector::zeros(a.ncols());
    for _ in 0..sweeps {
        for j in 0..x.len() {
            let grad = (h.row(j) * &x)[0] - g0[j];
            x[j] = (x[j] - grad / h[(j, j)]).max(0.0);
        }
    }
    x
}

#[test]
fn matches_dense_qp_oracle() {
    let times = logspace(0.01, 40.0, 60);
    let trace = two_exp(&times);
    let grid = T2Grid::log(0.05, 100.0, 24).unwrap();
    for &alpha in &[1e-4, 1e-2, 0.1] {
        let opts = InvertOptions { noise_sigma: Some(0.01), ..Default::default() };
        let sp = invert_with(&trace, &grid, alpha, &opts).unwrap();
        let k = build_kernel(&times, &grid).unwrap().entries;
        let a = k / 0.01;
        let b = DVector::from_column_slice(trace.values()) / 0.01;
        let lam2 = alpha * ALPHA_SCALE;
        let x = qp_oracle(&a, &b, lam2, 200_000);
        let obj = |w: &DVector<f64>| (&a * w - &b).norm_squared() + lam2 * w.norm_squared();
        let ws = DVector::from_column_slice(&sp.weights);
        let (o_sol, o_ref) = (obj(&ws), obj(&x));
        assert!((o_sol - o_ref) / o_ref < 1e-8, "alpha {alpha}: {o_sol} vs {o_ref}");
        assert!((sp.objective - o_sol).abs() / o_sol < 1e-9);
        assert!((&ws - &x).amax() < 1e-4 * x.amax(), "alpha {alpha}");
    }
}

#[test]
fn compressed_solve_matches_full_solve() {
    let times = linspace(0.0, 30.0, 400);
    let trace = add_noise(&two_exp(&times), 0.002, 5).unwrap();
    let grid = T2Grid::log(0.05, 100.0, 60).unwrap();
    let full = invert_with(&trace, &grid, 0.1, &InvertOptions { rank_tol: None, ..Default::default() }).unwrap();
    let comp = invert(&trace, &grid, 0.1).unwrap();
    assert!((full.objective - comp.objective).abs() / full.objective < 1e-6, "{} {}", full.objective, comp.objective);
    let f1 = forward_model(&full, &times).unwrap();
    let f2 = forward_model(&comp, &times).unwrap();
    let d = f1.values().iter().zip(f2.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-6, "{d}");
}

#[test]
fn objective_grows_with_alpha() {
    let times = logspace(0.01, 40.0, 120);
    let trace = add_noise(&two_exp(&times), 0.005, 2).unwrap();
    let grid = T2Grid::log(0.01, 100.0, 80).unwrap();
    let alphas = [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0];
    let objs: Vec<f64> = alphas.iter().map(|&a| invert(&trace, &grid, a).unwrap().objective).collect();
    assert!(objs.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)), "{objs:?}");
    let res: Vec<f64> = alphas.iter().map(|&a| invert(&trace, &grid, a).unwrap().residual_norm).collect();
    assert!(res.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-6)), "{res:?}");
}

#[test]
fn binned_and_unbinned_fits_agree_on_a_million_points() {
    let times = linspace(0.001, 50.0, 1_000_000);
    let model = DecayModel::new(vec![(1.0, 5.0)], 0.0).unwrap();
    let raw = add_noise(&synth_decay(&model, &times).unwrap(), 0.01, 11).unwrap();
    let grid = T2Grid::log(0.1, 500.0, 60).unwrap();
    let binned = log_bin(&raw, 50.0, 0.01).unwrap();
    assert!(binned.len() < 300);
    let a = invert(&raw, &grid, 0.1).unwrap().peaks(0.05);
    let b = invert(&binned, &grid, 0.1).unwrap().peaks(0.05);
    assert_eq!((a.len(), b.len()), (1, 1), "{a:?} {b:?}");
    assert!((a[0].t2 / 5.0).ln().abs() < 0.05, "{a:?}");
    assert!((a[0].t2 / b[0].t2).ln().abs() < 0.02, "{a:?} {b:?}");
    assert!((a[0].weight / b[0].weight - 1.0).abs() < 0.02);
}

#[test]
fn zero_trace_gives_zero_spectrum() {
    let t = linspace(0.0, 1.0, 20);
    let z = TimeSeries::new(t.clone(), vec![0.0; 20]).unwrap();
    let sp = invert(&z, &T2Grid::default(), 0.1).unwrap();
    assert_eq!(sp.total_weight(), 0.0);
    assert!(sp.peaks(0.05).is_empty());
}

#[test]
fn short_trace_rejected() {
    let t = linspace(0.0, 1.0, 9);
    let tr = TimeSeries::from_fn(t, |x| (-x).exp()).unwrap();
    assert!(matches!(invert(&tr, &T2Grid::default(), 0.1), Err(Error::InvalidInput(_))));
}

#[test]
fn li_map_keeps_order_and_labels_failing_slices() {
    let t = logspace(0.01, 100.0, 100);
    let grid = T2Grid::log(0.01, 1e3, 60).unwrap();
    let traces: Vec<(f64, TimeSeries)> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&v| (v, synth_decay(&DecayModel::new(vec![(1.0, v)], 0.0).unwrap(), &t).unwrap()))
        .collect();
    let map = li_map("offset_hz", &traces, &grid, 0.1).unwrap();
    assert_eq!(map.sweep_values, vec![1.0, 2.0, 3.0]);
    for (sp, v) in map.spectra.iter().zip([1.0, 2.0, 3.0]) {
        let p = sp.peaks(0.05);
        assert!((p[0].t2 / v).ln().abs() < 0.1);
    }
    let mut out = Vec::new();
    write_limap_csv(&map, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 60);

    let bad = vec![traces[0].clone(), (2.0, TimeSeries::new(linspace(0.0, 1.0, 5), vec![1.0; 5]).unwrap()), traces[2].clone()];
    match li_map("offset_hz", &bad, &grid, 0.1) {
        Err(Error::Slice { label, .. }) => assert!(label.contains('2'), "{label}"),
        other => panic!("{other:?}"),
    }
    let unsorted = vec![traces[1].clone(), traces[0].clone(), traces[2].clone()];
    assert!(li_map("offset_hz", &unsorted, &grid, 0.1).is_err());
}

#[test]
fn kernel_compression_reproduces_the_kernel() {
    let times = logspace(0.01, 100.0, 200);
    let grid = T2Grid::log(0.01, 1e3, 80).unwrap();
    let k = build_kernel(&times, &grid).unwrap();
    let c = compress_kernel(&k, 1e-12).unwrap();
    assert!(c.rank() < 60, "rank {}", c.rank());
    // K^T K is preserved by the reduced operator
    let g1 = k.entries.transpose() * &k.entries;
    let g2 = c.operator.transpose() * &c.operator;
    assert!((g1 - g2).amax() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_over_e_matches_bisection(w in 0.05f64..0.95, t1 in 0.1f64..2.0, ratio in 2.0f64..50.0) {
        let t2 = t1 * ratio;
        let f = |t: f64| w * (-t / t1).exp() + (1.0 - w) * (-t / t2).exp();
        let times = linspace(0.0, 10.0 * t2, 20_001);
        let tr = TimeSeries::from_fn(times, f).unwrap();
        let got = one_over_e_lifetime(&tr).unwrap();
        let (mut lo, mut hi) = (0.0, 10.0 * t2);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > (-1f64).exp() { lo = mid } else { hi = mid }
        }
        prop_assert!((got / lo - 1.0).abs() < 1e-4, "{got} vs {lo}");
    }

    #[test]
    fn nnls_satisfies_kkt(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (m, n) = (12, 7);
        let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        let sol = nnls(&a, &b).unwrap();
        let grad = a.transpose() * (&a * &sol.x - &b);
        for j in 0..n {
            prop_assert!(sol.x[j] >= 0.0);
            if sol.x[j] > 0.0 { prop_assert!(grad[j].abs() < 1e-8, "{}", grad[j]); }
            else { prop_assert!(grad[j] > -1e-8, "{}", grad[j]); }
        }
    }

    #[test]
    fn spectrum_is_nonnegative_and_fits_exponentials(t2 in 0.05f64..50.0, amp in 0.1f64..10.0) {
        let times = logspace(0.005, 500.0, 150);
        let tr = synth_decay(&DecayModel::new(vec![(amp, t2)], 0.0).unwrap(), &times).unwrap();
        let sp = invert(&tr, &T2Grid::log(0.001, 5e3, 100).unwrap(), 0.1).unwrap();
        prop_assert!(sp.weights.iter().all(|&w| w >= 0.0));
        let p = sp.peaks(0.05);
        prop_assert_eq!(p.len(), 1);
        prop_assert!((p[0].t2 / t2).ln().abs() < 0.1, "{} vs {}", p[0].t2, t2);
        prop_assert!((p[0].weight / amp - 1.0).abs() < 0.05);
    }

    #[test]
    fn trace_io_round_trips(n in 2usize..200, scale in 1e-6f64..1e3, seed in 0u64..100) {
        let times = linspace(0.0, scale, n);
        let tr = add_noise(&TimeSeries::from_fn(times, |t| (-t / scale).exp()).unwrap(), 0.1, seed).unwrap()
            .with_meta("offset_hz", 1825);
        let mut csv = Vec::new();
        write_trace_csv(&tr, &mut csv).unwrap();
        prop_assert_eq!(&read_trace_csv(&csv[..]).unwrap(), &tr);
        let mut bin = Vec::new();
        write_trace_bin(&tr, &mut bin).unwrap();
        let back = read_trace_bin(&bin[..]).unwrap();
        prop_assert_eq!(back.times(), tr.times());
        prop_assert_eq!(back.values(), tr.values());
    }
}
