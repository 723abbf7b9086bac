//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Pass a substring as the first free argument to run only matching
//! criteria, e.g. `cargo test --test acceptance -- fwer`.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use nalgebra::Matrix3;
use rayon::prelude::*;
use surf_core::geometry::{orthonormal_frame, theta_angle, SymMat};
use surf_core::inference::{
    eec, fwer_experiment, nondegeneracy_check, threshold, FieldType, FwerConfig, FwerReport, ResolutionMode,
};
use surf_core::jets::JetSource;
use surf_core::kernel::{GaussianKernel, Order};
use surf_core::lattice::{box_points, make_domain_preset, sample_ensemble, PresetName, RngSpec, VoxelSet};
use surf_core::lkc::{lkc_compute, lkc_constant_metric, lkc_stationary_closed_form, LkcOptions, LkcSource, LkcVector};
use surf_core::manifold::{EdgeType, VoxelManifold};
use surf_core::surf::SurfSpec;

use common::*;

type Check = fn() -> (bool, String);

struct Criterion {
    id: u8,
    name: &'static str,
    run: Check,
}

const CRITERIA: [Criterion; 6] = [
    Criterion { id: 1, name: "lkc-tables", run: lkc_tables },
    Criterion { id: 2, name: "closed-forms", run: closed_forms },
    Criterion { id: 3, name: "unbiased-consistent", run: unbiased_consistent },
    Criterion { id: 4, name: "fwer", run: fwer },
    Criterion { id: 5, name: "properties", run: properties },
    Criterion { id: 6, name: "performance", run: performance },
];

fn main() {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| filter.as_deref().is_none_or(|f| c.name.contains(f))) {
        let start = Instant::now();
        let (pass, detail) = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {} {:<20} {verdict} ({:.1}s) {detail}", c.id, c.name, start.elapsed().as_secs_f64());
        failed += usize::from(!pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

/// Accumulates failures while keeping one summary line.
#[derive(Default)]
struct Tally {
    checked: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, summary: String) -> (bool, String) {
        if self.failures.is_empty() {
            (true, format!("{} checks; {summary}", self.checked))
        } else {
            (false, format!("{}/{} failed: {}", self.failures.len(), self.checked, self.failures.join("; ")))
        }
    }
}

fn lkc_tables() -> (bool, String) {
    let mut t = Tally::default();
    let mut worst = [0.0f64; 3];
    for (dim, table, r, tol) in
        [(1, &TABLE_D1[..], 11, 5e-3), (2, &TABLE_D2[..], 11, 5e-3), (3, &TABLE_D3[..], 7, 1e-2)]
    {
        let rows: Vec<Vec<f64>> = FWHM.iter().map(|&f| white_noise_lkcs(dim, f, r)).collect();
        for (d, row) in table.iter().enumerate() {
            for (i, &want) in row.iter().enumerate() {
                let got = rows[i][d + 1];
                let rel = (got - want).abs() / want;
                worst[dim - 1] = worst[dim - 1].max(rel);
                t.check(rel < tol, || format!("D={dim} L{} f={}: {got:.3} vs {want}", d + 1, FWHM[i]));
            }
        }
    }
    t.finish(format!("max rel. error D1 {:.1e}, D2 {:.1e}, D3 {:.1e}", worst[0], worst[1], worst[2]))
}

fn closed_forms() -> (bool, String) {
    let mut t = Tally::default();
    for (dim, table, side) in [(1, &CLOSED_D1[..], 100.0), (2, &CLOSED_D2[..], 20.0), (3, &CLOSED_D3[..], 20.0)] {
        for (i, &f) in FWHM.iter().enumerate() {
            let l = lkc_stationary_closed_form(&vec![side; dim], f).unwrap();
            for (d, row) in table.iter().enumerate() {
                let (got, want) = (l.values[d + 1], row[i]);
                t.check(same_sig_figs(got, want, 4), || format!("D={dim} L{} f={f}: {got:.4} vs {want}", d + 1));
            }
        }
    }
    t.finish("all rows agree to 4 significant figures".into())
}

fn unbiased_consistent() -> (bool, String) {
    let (f, r, reps) = (3.0, 3, 200u64);
    let p = make_domain_preset("stat2d", f).unwrap();
    let m = VoxelManifold::new(p.domain.clone()).unwrap();
    let k = GaussianKernel::isotropic(2, f).unwrap();
    let theory = white_noise_lkcs(2, f, r)[2];
    let mut t = Tally::default();
    let mut parts = Vec::new();
    let mut sds = Vec::new();
    for n in [20usize, 100] {
        let l2: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|b| {
                let ens = sample_ensemble(p.data.clone(), n, RngSpec::new(2024, b), None).unwrap();
                lkc_compute(JetSource::Ensemble(&ens), &k, &m, r, LkcOptions::default()).unwrap().values[2]
            })
            .collect();
        let mean = l2.iter().sum::<f64>() / reps as f64;
        let sd = (l2.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
        let se = sd / (reps as f64).sqrt();
        let z = (mean - theory) / se;
        t.check(z.abs() < 3.0, || format!("N={n}: mean {mean:.2} is {z:.2} SE from {theory:.2}"));
        parts.push(format!("N={n}: mean {mean:.2} (z {z:+.2}), sd {sd:.2}"));
        sds.push(sd);
    }
    let ratio = sds[0] / sds[1];
    t.check(ratio > 1.5, || format!("SD ratio {ratio:.2} <= 1.5"));
    t.finish(format!("theory L2 {theory:.2}; {}; SD ratio {ratio:.2}", parts.join("; ")))
}

fn fwer_run(fwhm: f64) -> FwerReport {
    let config =
        FwerConfig { preset: PresetName::Stat2d, fwhm, n_subjects: 50, n_reps: 500, seed: 7, ..Default::default() };
    fwer_experiment(&config).unwrap()
}

fn fwer() -> (bool, String) {
    let mut t = Tally::default();
    let mut parts = Vec::new();
    for f in [3.0, 1.0] {
        let rep = fwer_run(f);
        t.check(rep.failures.is_empty(), || format!("f={f}: {} failed replications", rep.failures.len()));
        let nested = rep.replications.iter().all(|r| r.maxima[0] <= r.maxima[1] && r.maxima[1] <= r.maxima[2]);
        t.check(nested, || format!("f={f}: maxima not nested in some replication"));
        let [f0, f1, finf] = ResolutionMode::ALL.map(|m| rep.mode(m).fwer);
        let b = rep.completed as f64;
        let ec = rep.mode(ResolutionMode::Continuous).eec;
        parts.push(format!("f={f}: FWER 0/1/inf {f0:.3}/{f1:.3}/{finf:.3}, EEC {ec:.3}"));
        if f == 3.0 {
            t.check((0.03..=0.07).contains(&finf), || format!("f=3: FWER(inf) {finf:.3} outside [0.03, 0.07]"));
            t.check((ec - finf).abs() <= 0.015, || format!("f=3: EEC {ec:.3} vs FWER(inf) {finf:.3}"));
        } else {
            let pooled = (f0 * (1.0 - f0) / b + finf * (1.0 - finf) / b).sqrt();
            let gap = (finf - f0) / pooled;
            parts.push(format!("gap {gap:.2} pooled SE"));
            t.check(gap > 2.0, || format!("f=1: gap {gap:.2} pooled SE"));
        }
    }
    t.finish(parts.join("; "))
}

fn properties() -> (bool, String) {
    let mut t = Tally::default();

    // Analytic derivatives against central differences.
    let mut worst: f64 = 0.0;
    for dim in 1..=3 {
        let set = Arc::new(box_points(dim, 1, 6).unwrap());
        let ens = Arc::new(sample_ensemble(set, 4, RngSpec::new(3, dim as u64), None).unwrap());
        let k = GaussianKernel::isotropic(dim, 2.0).unwrap();
        let x: Vec<f64> = (0..dim).map(|d| 2.6 + 0.41 * d as f64).collect();
        let v: Vec<f64> = vec![3.0; dim];
        let kd = fd_gradient(|p| k.value(p, &v), &x, 1e-5);
        worst = worst.max(max_rel_err(&k.gradient(&x, &v), &kd, 1e-3));
        for normalized in [false, true] {
            let spec = SurfSpec::new(ens.clone(), k.clone(), normalized).unwrap();
            let at = spec.eval(&x, Order::Hessian, 2).unwrap();
            let fd = fd_gradient(|p| spec.eval(p, Order::Value, 2).unwrap().value, &x, 1e-5);
            worst = worst.max(max_rel_err(&at.gradient, &fd, 1e-2));
            for d in 0..dim {
                let fd = fd_gradient(|p| spec.eval(p, Order::Gradient, 2).unwrap().gradient[d], &x, 1e-5);
                worst = worst.max(max_rel_err(&at.hessian[d * dim..(d + 1) * dim], &fd, 1e-2));
            }
        }
        let spec = SurfSpec::new(ens, k, false).unwrap();
        let tg = spec.t_field(&x, Order::Gradient).unwrap().gradient;
        let fd = fd_gradient(|p| spec.t_field(p, Order::Value).unwrap().value, &x, 1e-5);
        worst = worst.max(max_rel_err(&tg, &fd, 1e-2));
    }
    t.check(worst < 1e-5, || format!("derivative error {worst:.1e}"));

    // Frames of a generic metric.
    let g = Matrix3::new(2.0, 0.3, -0.2, 0.3, 1.5, 0.4, -0.2, 0.4, 1.1);
    let mut frame_err: f64 = 0.0;
    for (k, l) in [(0, 1), (0, 2), (1, 2)] {
        let fr = orthonormal_frame(&g, k, l).unwrap();
        let basis = [fr.u, fr.v, fr.n];
        for a in 0..3 {
            for b in 0..3 {
                let ip = (basis[a].transpose() * g * basis[b])[0];
                frame_err = frame_err.max((ip - f64::from(u8::from(a == b))).abs());
            }
        }
    }
    t.check(frame_err < 1e-12, || format!("frame error {frame_err:.1e}"));

    // Edge angles under the identity metric.
    let id = Matrix3::identity();
    for (edge, want) in [(EdgeType::Convex, PI / 2.0), (EdgeType::DoubleConvex, -PI), (EdgeType::Concave, -PI / 2.0)] {
        let got = theta_angle(&id, 2, edge).unwrap();
        t.check((got - want).abs() < 1e-14, || format!("{edge:?} angle {got}"));
    }

    // A box of sides (a, b, e) under the metric c^2 I has L1 = c (a + b + e).
    let c = 1.7;
    let boxed = VoxelSet::from_integer_points(
        3,
        (0..2).flat_map(|i| (0..3).flat_map(move |j| (0..4).map(move |k| vec![i, j, k]))),
    )
    .unwrap();
    let mut metric = SymMat::identity(3);
    (0..3).for_each(|d| metric.m[d][d] = c * c);
    let l1 = lkc_constant_metric(&VoxelManifold::new(Arc::new(boxed)).unwrap(), 1, &metric).unwrap().values[1];
    t.check((l1 - 9.0 * c).abs() < 1e-12 * 9.0 * c, || format!("box L1 {l1}"));

    // Euler characteristics.
    let chi = |pts: Vec<Vec<i64>>| {
        VoxelManifold::new(Arc::new(VoxelSet::from_integer_points(2, pts).unwrap())).unwrap().euler_characteristic()
    };
    let frame: Vec<Vec<i64>> =
        (0..4).flat_map(|i| (0..4).map(move |j| vec![i, j])).filter(|p| p[0] % 3 == 0 || p[1] % 3 == 0).collect();
    for (got, want, what) in [
        (chi(vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]), 1, "box"),
        (chi(vec![vec![0, 0], vec![0, 1], vec![4, 4], vec![4, 5]]), 2, "two boxes"),
        (chi(frame), 0, "frame"),
    ] {
        t.check(got == want, || format!("chi({what}) = {got}"));
    }

    // Non-degeneracy ranks.
    let k3 = GaussianKernel::isotropic(3, 3.0).unwrap().with_truncation(2.0).unwrap();
    let x = [0.2, -0.1, 0.3];
    let full = nondegeneracy_check(&k3, &box_points(3, -1, 1).unwrap(), &x).unwrap();
    let single = nondegeneracy_check(&k3, &VoxelSet::new(3, vec![0.0; 3]).unwrap(), &x).unwrap();
    t.check(full.pass, || format!("3-neighbourhood rank {}", full.rank));
    t.check(!single.pass, || format!("singleton rank {}", single.rank));

    // Threshold round trip.
    let mut trip: f64 = 0.0;
    for (vals, field) in [
        (vec![1.0, 55.5], FieldType::Gaussian),
        (vec![1.0, 22.2, 123.23], FieldType::Gaussian),
        (vec![1.0, 33.3, 369.68, 1367.9], FieldType::student_t(49.0).unwrap()),
    ] {
        let l = LkcVector::from_values(vals, LkcSource::Estimate).unwrap();
        for alpha in [0.01, 0.05, 0.1] {
            let u = threshold(&l, field, alpha).unwrap();
            trip = trip.max((eec(&l, field, u).unwrap() - alpha).abs());
        }
    }
    t.check(trip < 1e-7, || format!("threshold round trip {trip:.1e}"));

    // Gaussian EC densities against simulated excursion sets.
    let mut zs = Vec::new();
    for (dim, reps, r, seed) in [(1, 2000, 49, 11), (2, 2000, 3, 12)] {
        let l = LkcVector::from_values(white_noise_lkcs(dim, 3.0, 11), LkcSource::WhiteNoiseTheory).unwrap();
        for est in monte_carlo_ec(dim, 3.0, reps, r, seed, &[2.0, 2.5, 3.0]) {
            let z = (est.mean - eec(&l, FieldType::Gaussian, est.u).unwrap()) / est.se;
            zs.push(z.abs());
            t.check(z.abs() < 3.0, || format!("EC D={dim} u={} off by {z:.2} SE", est.u));
        }
    }
    let zmax = zs.iter().copied().fold(0.0, f64::max);

    // Thread-count determinism of a small FWER run.
    let config = FwerConfig { preset: PresetName::Stat2d, n_subjects: 12, n_reps: 4, seed: 3, ..Default::default() };
    let run = |n| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        serde_json::to_string(&pool.install(|| fwer_experiment(&config).unwrap())).unwrap()
    };
    t.check(run(1) == run(4), || "FWER output depends on the thread count".into());

    t.finish(format!(
        "derivative error {worst:.1e}, frame error {frame_err:.1e}, round trip {trip:.1e}, EC max |z| {zmax:.2}"
    ))
}

fn performance() -> (bool, String) {
    let mut t = Tally::default();
    let mut parts = Vec::new();
    for (dim, limit) in [(2, 5.0), (3, 60.0)] {
        let p = make_domain_preset(stat_preset(dim), 3.0).unwrap();
        let m = VoxelManifold::new(p.domain.clone()).unwrap();
        let k = GaussianKernel::isotropic(dim, 3.0).unwrap();
        let ens = sample_ensemble(p.data.clone(), 100, RngSpec::new(1, 0), None).unwrap();
        let start = Instant::now();
        lkc_compute(JetSource::Ensemble(&ens), &k, &m, 1, LkcOptions::default()).unwrap();
        let secs = start.elapsed().as_secs_f64();
        parts.push(format!("D={dim} {secs:.2}s (limit {limit}s)"));
        t.check(secs <= limit, || format!("D={dim} took {secs:.2}s"));
    }
    t.finish(format!("{} on {} thread(s)", parts.join(", "), rayon::current_num_threads()))
}
