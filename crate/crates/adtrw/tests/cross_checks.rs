//! Heavier cross-module consistency checks: independent oracles and
//! asymptotic laws that exercise several modules together.

use adtrw::actrw::{composed_states, MLParams};
use adtrw::bell::incomplete_bell;
use adtrw::density::DensitySpec;
use adtrw::dtrp::mean_arrivals;
use adtrw::recurrence::{est_lt, est_numeric, EstValue};
use adtrw::sibuya::{sibuya_mean_arrivals, SibuyaParams};
use adtrw::special::gamma;
use adtrw::verify::bell_partition_oracle;
use adtrw::walk::{renewal_residual, simple_walk_dist};
use adtrw::WaitingTimeDensity;

fn geometric(p: f64, horizon: usize) -> WaitingTimeDensity {
    WaitingTimeDensity::new(&DensitySpec::Geometric { p }, horizon).unwrap()
}

fn sibuya(beta: f64, horizon: usize) -> WaitingTimeDensity {
    WaitingTimeDensity::new(&DensitySpec::Sibuya { beta }, horizon).unwrap()
}

#[test]
fn bell_convolution_equals_partition_sums_to_r32() {
    for d in [geometric(0.5, 32), sibuya(0.5, 32)] {
        let table = incomplete_bell(&d, 32).unwrap();
        for r in 0..=32usize {
            for n in 0..=r {
                let oracle = bell_partition_oracle(d.probs(), r, n);
                assert!(
                    (table.value(r, n) - oracle).abs() < 1e-12,
                    "r={r} n={n}: {} vs {oracle}",
                    table.value(r, n)
                );
            }
        }
    }
}

#[test]
fn sojourn_sum_gap_shrinks_monotonically() {
    let d = geometric(0.6, 2048);
    let exact = match est_lt(&d, 0).unwrap() {
        EstValue::Finite(v) => v,
        EstValue::Infinite => unreachable!(),
    };
    let series = adtrw::walk::simple_site_series(&d, 0, 2048).unwrap();
    let mut cum = 0.0;
    let mut gaps = Vec::new();
    for (t, v) in series.iter().enumerate() {
        cum += v;
        if [256usize, 512, 1024, 2048].contains(&t) {
            gaps.push((exact - cum).abs());
        }
    }
    for w in gaps.windows(2) {
        assert!(w[1] <= w[0] + 1e-15, "gap grew: {w:?}");
    }
    assert!(gaps.last().unwrap() < &1e-3, "final gap {:?}", gaps.last());
}

#[test]
fn sibuya_mean_arrivals_asymptotic_power_law() {
    // E[N(t)] Γ(β+1) / t^β -> 1; the "-1" in the closed form contributes
    // Γ(β+1)/t^β, so the 1% band is reached around t ~ 1e4 for β = 1/2
    let beta = 0.5;
    let p = SibuyaParams::new(beta).unwrap();
    let ratio_at =
        |t: usize| sibuya_mean_arrivals(p, t) * gamma(beta + 1.0) / (t as f64).powf(beta);
    let r_mid = ratio_at(4096);
    let r_far = ratio_at(16384);
    assert!((r_far - 1.0).abs() < 0.01, "ratio {r_far}");
    assert!(
        (r_far - 1.0).abs() < (r_mid - 1.0).abs(),
        "not converging: {r_mid} -> {r_far}"
    );
    // and the closed form agrees with the convolution route at moderate t
    let d = sibuya(beta, 512);
    let en = mean_arrivals(&d, 512).unwrap();
    for t in [1usize, 17, 256, 512] {
        assert!(
            (en[t] - sibuya_mean_arrivals(p, t)).abs() < 1e-8,
            "t={t}: {} vs {}",
            en[t],
            sibuya_mean_arrivals(p, t)
        );
    }
}

#[test]
fn sibuya_series_solves_renewal_equation() {
    let d = sibuya(0.5, 256);
    let series: Vec<_> = (0..=256)
        .map(|t| simple_walk_dist(&d, t).unwrap())
        .collect();
    let res = renewal_residual(&d, &series).unwrap();
    assert!(res < 1e-10, "residual {res}");
}

#[test]
fn sibuya_sojourn_quadrature_tracks_return_sums_across_beta() {
    use adtrw::sibuya::{sibuya_est_origin, sibuya_return_series, SibuyaParams};
    for (beta, t_max, tol) in [(0.3, 1024, 0.02), (0.5, 1024, 0.01), (0.7, 2048, 0.05)] {
        let p = SibuyaParams::new(beta).unwrap();
        let quad = sibuya_est_origin(p).unwrap();
        let sum: f64 = sibuya_return_series(p, t_max).unwrap().iter().sum();
        assert!(
            (quad - sum).abs() < tol,
            "beta={beta}: quadrature {quad} vs sum({t_max}) {sum}"
        );
        // monotone from below, up to quadrature + convolution roundoff
        assert!(
            sum <= quad + 1e-8,
            "beta={beta}: sum {sum} above quadrature {quad}"
        );
    }
}

#[test]
fn composed_survival_monotone_in_time() {
    let d = geometric(0.6, 512);
    let clock = MLParams::new(0.7, 1.0).unwrap();
    let mut prev = 1.0;
    for k in 1..=12 {
        let t = 0.5 * k as f64;
        let cs = composed_states(&d, clock, t, 0).unwrap();
        assert!(
            cs.probs[0] <= prev + 1e-12,
            "survival increased at t={t}: {} > {prev}",
            cs.probs[0]
        );
        prev = cs.probs[0];
    }
}

#[test]
fn est_numeric_tracks_est_lt_across_sites() {
    // per-site agreement between residue formulas and truncated sums,
    // both signs of the bias
    for p in [0.6, 0.35] {
        let d = geometric(p, 1024);
        for site in [-2i64, -1, 0, 1, 3] {
            let exact = match est_lt(&d, site).unwrap() {
                EstValue::Finite(v) => v,
                EstValue::Infinite => unreachable!(),
            };
            let partial = est_numeric(&d, site, 1024).unwrap();
            assert!(
                (exact - partial).abs() < 1e-6,
                "p={p} site={site}: residue {exact} vs sum {partial}"
            );
        }
    }
}
