//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use statrs::function::gamma::gamma_ur;

use mixcut::chain::{
    check_detailed_balance, random_reversible_chain, survival_probability, transient_distribution,
    ChainSpec,
};
use mixcut::family::{
    asymptotic_profile_check, build_family_chain, hitting_profile, separation_minorization_check,
    FamilyParams, ProductApproxCurve,
};
use mixcut::metrics::{worst_case_profile, ChainCurve, DistanceKind};
use mixcut::mixing::mixing_time_auto;
use mixcut::product::{product_hellinger, product_separation, product_tv_bounds, tensor_product, ProductSpec};
use mixcut::suite::{mixing_window, random_sources, run_suite, Inequality, SuiteConfig};

const PLATEAU: f64 = 0.632_120_558_8;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn plateau() -> Outcome {
    let p = FamilyParams::new(128, 1e-6).unwrap();
    let grid: Vec<f64> = (1..=12).map(|k| 0.25 * k as f64).collect();
    let table = asymptotic_profile_check(p, &grid).unwrap();
    let v = table.row_near(1.5).unwrap().product_tv_approx;
    outcome((v - PLATEAU).abs() <= 0.05, format!("product TV at 1.5n = {v:.6}"))
}

fn no_cutoff_shape() -> Outcome {
    let p = FamilyParams::new(128, 1e-6).unwrap();
    let table = asymptotic_profile_check(p, &[0.75, 2.5]).unwrap();
    let early = table.rows[0].product_tv_approx;
    let late = table.rows[1].product_tv_approx;
    let mut curve = ProductApproxCurve::new(p).unwrap();
    let t60 = mixing_time_auto(&mut curve, 0.60).unwrap();
    let t70 = mixing_time_auto(&mut curve, 0.70).unwrap();
    let ratio = t60 / t70;
    outcome(
        early >= 0.95 && late <= 0.05 && ratio >= 1.8,
        format!(
            "TV(0.75n) = {early:.6} (>= 0.95), TV(2.5n) = {late:.3e} (<= 0.05), \
             T(0.60)/T(0.70) = {ratio:.4} (>= 1.8; T(0.60)/n = {:.4}, T(0.70)/n = {:.4})",
            t60 / 128.0,
            t70 / 128.0
        ),
    )
}

fn marginal_cutoff() -> Outcome {
    let fam = build_family_chain(FamilyParams::new(128, 1e-6).unwrap()).unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for kind in [DistanceKind::TotalVariation, DistanceKind::Separation] {
        let mut curve = ChainCurve::new(&fam.chain, kind).unwrap();
        let early = mixing_time_auto(&mut curve, 0.2).unwrap();
        let late = mixing_time_auto(&mut curve, 0.8).unwrap();
        let r = early / late;
        ok &= r <= 1.35;
        detail.push(format!("{kind}: {r:.4}"));
    }
    outcome(ok, format!("t(0.2)/t(0.8) {} (<= 1.35)", detail.join(", ")))
}

fn hitting_reduction() -> Outcome {
    let p = FamilyParams::new(64, 1e-6).unwrap();
    let times: Vec<f64> = (1..=40).map(|k| 3.0 * 64.0 * k as f64 / 40.0).collect();
    let prof = hitting_profile(p, &times).unwrap();
    let gap = prof.max_tv_gap();
    outcome(gap <= 0.01, format!("sup |d(t) - P_A(tau > t)| = {gap:.3e} (<= 0.01)"))
}

fn suite_batch() -> (Outcome, Outcome) {
    let config = SuiteConfig {
        master_seed: 7,
        chain_count: 500,
        inequalities: vec![
            Inequality::HellingerDoubling,
            Inequality::TvSeparation,
            Inequality::TvHellinger,
            Inequality::PairwiseHellinger,
            Inequality::TvPairwise,
            Inequality::SeparationSubmultiplicative,
            Inequality::PairwiseSubmultiplicative,
        ],
        ..SuiteConfig::default()
    };
    let report = run_suite(&config).unwrap();
    let doubling = report.result(Inequality::HellingerDoubling).unwrap();
    let c5 = outcome(
        doubling.passed && doubling.tolerance == 1e-9 && report.nonvacuous,
        format!(
            "{} instances, worst margin {:.3e}, errors {}, max d_H seen {:.3}",
            doubling.instances, doubling.worst_margin, doubling.errors, report.max_hellinger
        ),
    );
    let others: Vec<_> = report
        .results
        .iter()
        .filter(|r| r.id != Inequality::HellingerDoubling)
        .collect();
    let ok = others.iter().all(|r| r.passed && r.tolerance == 1e-9);
    let detail = others
        .iter()
        .map(|r| format!("{} {:.2e}", r.id.name(), r.worst_margin))
        .collect::<Vec<_>>()
        .join(", ");
    (c5, outcome(ok, format!("worst margins: {detail}")))
}

fn precutoff_ratio() -> Outcome {
    let mut worst_ratio = 0.0f64;
    let mut worst_literal = 0.0f64;
    let mut worst_window = f64::NEG_INFINITY;
    let config = SuiteConfig {
        master_seed: 11,
        chain_count: 50,
        ..SuiteConfig::default()
    };
    let mut bases: Vec<ChainSpec> = random_sources(&config)
        .iter()
        .map(|s| s.build(&config).unwrap())
        .collect();
    bases.push(build_family_chain(FamilyParams::new(64, 1e-6).unwrap()).unwrap().chain);
    let mut family_ratio = 0.0;
    for (i, base) in bases.iter().enumerate() {
        let w = mixing_window(base, 64, 0.3).unwrap();
        worst_ratio = worst_ratio.max(w.ratio());
        worst_literal = worst_literal.max(w.product_early / w.product_late);
        worst_window = worst_window.max(w.margin());
        if i == 50 {
            family_ratio = w.ratio();
        }
    }
    outcome(
        worst_ratio <= 2.05 && worst_literal <= 2.05 && worst_window <= 1e-6,
        format!(
            "max T_s(0.3)/T_s(0.7) = {worst_ratio:.4} (G_64: {family_ratio:.4}), \
             max T_s(0.7)/T_s(0.3) = {worst_literal:.4}, window margin {worst_window:.3e}"
        ),
    )
}

fn product_exactness() -> Outcome {
    let base = random_reversible_chain(2024, 4, 2.5, (0.5, 2.0)).unwrap();
    let tensor = tensor_product(&ProductSpec::new(base.clone(), 3).unwrap()).unwrap();
    let times: Vec<f64> = (0..20).map(|k| 0.05 * 1.35f64.powi(k)).collect();
    let mut worst: f64 = 0.0;
    let mut bounds_ok = true;
    let sep_b = worst_case_profile(&base, DistanceKind::Separation, &times).unwrap();
    let sep_t = worst_case_profile(&tensor, DistanceKind::Separation, &times).unwrap();
    let hel_b = worst_case_profile(&base, DistanceKind::Hellinger, &times).unwrap();
    let hel_t = worst_case_profile(&tensor, DistanceKind::Hellinger, &times).unwrap();
    let tv_b = worst_case_profile(&base, DistanceKind::TotalVariation, &times).unwrap();
    let tv_t = worst_case_profile(&tensor, DistanceKind::TotalVariation, &times).unwrap();
    for i in 0..times.len() {
        worst = worst.max((product_separation(sep_b.values[i], 3).unwrap() - sep_t.values[i]).abs());
        worst = worst.max((product_hellinger(hel_b.values[i], 3).unwrap() - hel_t.values[i]).abs());
        let b = product_tv_bounds(hel_b.values[i], tv_b.values[i], 3).unwrap();
        bounds_ok &= b.lower <= tv_t.values[i] + 1e-12 && tv_t.values[i] <= b.upper + 1e-12;
    }
    outcome(
        worst <= 1e-9 && bounds_ok,
        format!("max formula error {worst:.3e} (<= 1e-9), TV inside bounds: {bounds_ok}"),
    )
}

fn family_reversibility() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in 3..=8usize {
        let eps = (-((n * n) as f64)).exp2();
        let fam = build_family_chain(FamilyParams::new(n, eps).unwrap()).unwrap();
        let pi = fam.stationary().unwrap();
        let bal = check_detailed_balance(&fam.chain, &pi, 1e-10).unwrap();
        let outside = pi.mass_excluding(&[2 * n]);
        ok &= bal.balanced && outside <= 10.0 * eps;
        detail.push(format!("n={n}: viol {:.1e}", bal.worst_violation));
    }
    for n in [4usize, 6] {
        let nf = n as f64;
        let eps = (-((n * n) as f64)).exp2();
        let r = separation_minorization_check(
            FamilyParams::new(n, eps).unwrap(),
            &[nf / 2.0, nf, 2.0 * nf, 3.0 * nf],
        )
        .unwrap();
        ok &= r.holds && r.worst_log_margin > 0.0;
        detail.push(format!(
            "n={n}: log margin {:.3}, |d_s - d| <= {:.1e}",
            r.worst_log_margin, r.max_sep_tv_gap
        ));
    }
    outcome(ok, detail.join(", "))
}

fn oracle_self_test() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in [4usize, 16, 64] {
        let mut rates: Vec<(usize, usize, f64)> = (0..k).map(|i| (i, i + 1, 1.0)).collect();
        rates.push((k, 0, 1.0));
        let chain = ChainSpec::from_rates(None, k + 1, &rates).unwrap();
        for &t in &[0.5, 1.0, k as f64 / 2.0, k as f64, 1.5 * k as f64, 2.0 * k as f64] {
            let got = survival_probability(&chain, &[k], 0, t).unwrap();
            worst = worst.max((got - gamma_ur(k as f64, t)).abs());
        }
    }
    let (a, b) = (0.7, 1.9);
    let chain = ChainSpec::from_rates(None, 2, &[(0, 1, a), (1, 0, b)]).unwrap();
    for &t in &[0.0, 0.1, 0.5, 1.0, 3.0, 10.0] {
        let e = (-(a + b) * t).exp();
        let p00 = b / (a + b) + a / (a + b) * e;
        let p11 = a / (a + b) + b / (a + b) * e;
        worst = worst.max((transient_distribution(&chain, 0, t).unwrap().prob(0) - p00).abs());
        worst = worst.max((transient_distribution(&chain, 1, t).unwrap().prob(1) - p11).abs());
    }
    outcome(worst <= 1e-10, format!("max error {worst:.3e} (<= 1e-10)"))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn main() {
    let mut rows: Vec<(u32, &str, Outcome, Duration, Duration)> = Vec::new();
    let secs = Duration::from_secs;

    let (o, d) = timed(plateau);
    rows.push((1, "plateau at 1 - 1/e", o, d, secs(10)));
    let (o, d) = timed(no_cutoff_shape);
    rows.push((2, "no-cutoff shape", o, d, secs(30)));
    let (o, d) = timed(marginal_cutoff);
    rows.push((3, "marginal cutoff", o, d, secs(60)));
    let (o, d) = timed(hitting_reduction);
    rows.push((4, "hitting-time reduction", o, d, secs(60)));
    let ((c5, c8), d) = timed(suite_batch);
    rows.push((5, "Hellinger doubling", c5, d, secs(120)));
    let (o, d) = timed(precutoff_ratio);
    rows.push((6, "pre-cutoff ratio", o, d, secs(120)));
    let (o, d) = timed(product_exactness);
    rows.push((7, "product-formula exactness", o, d, secs(60)));
    rows.push((8, "comparison inequalities", c8, Duration::ZERO, secs(120)));
    let (o, d) = timed(family_reversibility);
    rows.push((9, "family reversibility", o, d, secs(30)));
    let (o, d) = timed(oracle_self_test);
    rows.push((10, "oracle self-test", o, d, secs(5)));

    let mut failed = 0;
    for (id, name, o, took, limit) in &rows {
        let pass = o.passed && took <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {id:>2} {name}: {} ({:.2}s, limit {}s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", rows.len() - failed, rows.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
