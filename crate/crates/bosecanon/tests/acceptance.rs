//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

use std::time::{Duration, Instant};

use bosecanon::parallel;
use bosecanon_core::compositions::{
    coefficient_row_polynomial, count_bounded_binomial, count_bounded_nested, count_bounded_row,
    enumerate_partitions, product_decomposition_row, CapVector,
};
use bosecanon_core::numerics::{Backend, LogFloat, Rational};
use bosecanon_core::occupancy::{
    beta_derivative_ground, covariance_matrix, level_marginal, mean_occupation,
    mean_occupation_plus, Sampler,
};
use bosecanon_core::partition::{z_bruteforce, z_powersum};
use bosecanon_core::spectrum::{weights_from_spectrum, InverseTemperature, LevelSet, WeightVector};
use bosecanon_core::verify::{
    generate_instance, verify_lemma, CampaignConfig, CampaignSummary, Claim, Verdict,
};
use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn two_level() -> WeightVector<Rational> {
    WeightVector::new(vec![q(1, 2), q(1, 4)]).unwrap()
}

struct Check {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Check {
    Check {
        ok,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, start: Instant) -> (bool, String) {
    let elapsed = start.elapsed();
    (
        elapsed < limit,
        format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn random_weights(
    seed: u64,
    instances: u64,
    max_levels: usize,
    max_n: usize,
) -> Vec<(WeightVector<Rational>, usize)> {
    let config = CampaignConfig {
        seed,
        instances,
        max_levels,
        max_n,
        ..Default::default()
    };
    (0..instances)
        .map(|id| {
            let g = generate_instance(&config, id).unwrap();
            (WeightVector::from_rationals(&g.weights).unwrap(), g.n)
        })
        .collect()
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut mismatches = 0;
    for (w, n) in random_weights(1, 100, 5, 10) {
        if z_powersum(&w, n).values() != z_bruteforce(&w, n).unwrap().values() {
            mismatches += 1;
        }
    }
    let (fast, time) = timed(Duration::from_secs(60), start);
    check(
        mismatches == 0 && fast,
        format!("100 instances, {mismatches} mismatches, {time}"),
    )
}

fn lemma_everywhere() -> Check {
    let mut systems = vec![
        two_level(),
        WeightVector::new(vec![q(1, 1), q(1, 2), q(1, 4)]).unwrap(),
        WeightVector::new(vec![q(3, 5)]).unwrap(),
    ];
    systems.extend(random_weights(2, 100, 5, 10).into_iter().map(|(w, _)| w));
    let mut total = 0;
    let mut strict = 0;
    let mut fails = 0;
    for w in &systems {
        for r in verify_lemma(w, 13)
            .unwrap()
            .iter()
            .filter(|r| r.claim == Claim::Lemma)
        {
            total += 1;
            match r.verdict {
                Verdict::PassStrict => strict += 1,
                Verdict::PassWeak => {}
                _ => fails += 1,
            }
        }
    }
    check(
        fails == 0,
        format!(
            "{} systems, {total} pairs m < n <= 12, {strict} strict, {fails} failures",
            systems.len()
        ),
    )
}

fn theorem_campaign(summary: &CampaignSummary, elapsed: Duration) -> Check {
    let theorem = [
        Claim::ThmI,
        Claim::ThmII,
        Claim::ThmIII,
        Claim::ThmIV,
        Claim::ThmIVPrime,
    ];
    let mut bad = 0;
    let mut counted = 0;
    for r in summary
        .reports
        .iter()
        .filter(|r| theorem.contains(&r.claim))
    {
        counted += 1;
        let allowed = r.verdict == Verdict::PassStrict
            || (r.claim == Claim::ThmIII && r.verdict == Verdict::Vacuous);
        if !allowed {
            bad += 1;
        }
    }
    let counts = summary.counts();
    let every_claim_strict = theorem.iter().all(|c| {
        counts
            .get(c)
            .and_then(|v| v.get(&Verdict::PassStrict))
            .is_some()
    });
    let fast = elapsed < Duration::from_secs(300);
    check(
        bad == 0 && summary.fail_count() == 0 && every_claim_strict && fast,
        format!(
            "{counted} theorem comparisons, {bad} not strict, {} failures overall, {:.2}s of 300s",
            summary.fail_count(),
            elapsed.as_secs_f64()
        ),
    )
}

fn ladder(beta: f64) -> LevelSet {
    LevelSet::simple(
        vec![q(0, 1), q(1, 1), q(2, 1)],
        InverseTemperature::float(beta).unwrap(),
    )
    .unwrap()
}

fn ground_mean(beta: f64, n: usize) -> f64 {
    let w: WeightVector<LogFloat> = weights_from_spectrum(&ladder(beta)).unwrap();
    mean_occupation(&w, n, 0).unwrap().to_linear()
}

fn beta_derivative_vs_difference() -> Check {
    let mut worst: f64 = 0.0;
    for n in [1, 5, 10] {
        for beta in [0.3, 1.0, 3.0] {
            let closed = beta_derivative_ground::<LogFloat>(&ladder(beta), n).unwrap();
            let h = 1e-4 * beta.max(1.0);
            let fd = (ground_mean(beta + h, n) - ground_mean(beta - h, n)) / (2.0 * h);
            worst = worst.max(((closed - fd) / fd).abs());
        }
    }
    check(
        worst <= 1e-5,
        format!("worst relative error {worst:.2e} over 9 points"),
    )
}

fn fixture_exactness() -> Check {
    let w = two_level();
    let mut wrong = Vec::new();
    if z_powersum(&w, 3).values() != [q(1, 1), q(3, 4), q(7, 16), q(15, 64)] {
        wrong.push("Z");
    }
    if mean_occupation(&w, 2, 0).unwrap() != q(10, 7) {
        wrong.push("mean");
    }
    if covariance_matrix(&w, 2).unwrap().covariance[0][1] != q(-26, 49) {
        wrong.push("cov");
    }
    if mean_occupation_plus(&w, q(1, 2), 2, 0).unwrap().mean != q(14, 17) {
        wrong.push("added-level mean");
    }
    if level_marginal(&w, 2, 1).unwrap().probs != [q(4, 7), q(2, 7), q(1, 7)] {
        wrong.push("marginal");
    }
    check(
        wrong.is_empty(),
        if wrong.is_empty() {
            "5 exact values".to_string()
        } else {
            format!("wrong: {wrong:?}")
        },
    )
}

fn combinatorics() -> Check {
    let mut partitions = 0;
    let mut problems = Vec::new();
    for n in 1..=14 {
        for p in enumerate_partitions(n).unwrap() {
            partitions += 1;
            let row = count_bounded_row(&p);
            let total = p.total() as usize;
            if row != coefficient_row_polynomial(&p) {
                problems.push(format!("{p}: polynomial"));
            }
            for m in 0..=total {
                if row[m] != row[total - m] {
                    problems.push(format!("{p}: symmetry at {m}"));
                }
                if 2 * m < total && row[m] > row[m + 1] {
                    problems.push(format!("{p}: monotone at {m}"));
                }
                if count_bounded_nested(&p, m as i64) != row[m] {
                    problems.push(format!("{p}: nested at {m}"));
                }
            }
            for position in 1..=p.len() {
                for m in 0..=p.as_slice()[position - 1] as usize {
                    if count_bounded_binomial(&p, m as i64, position).unwrap() != row[m] {
                        problems.push(format!("{p}: binomial at position {position}, m {m}"));
                    }
                }
            }
        }
    }
    let example: Vec<BigUint> = [1u32, 2, 3, 3, 2, 1]
        .iter()
        .map(|&c| BigUint::from(c))
        .collect();
    if count_bounded_row(&CapVector::new(vec![2, 3]).unwrap()) != example {
        problems.push("(2,3) row".into());
    }
    let first = problems
        .first()
        .map(|p| format!(", first: {p}"))
        .unwrap_or_default();
    check(
        problems.is_empty(),
        format!(
            "{partitions} cap vectors with total <= 14, {} problems{first}",
            problems.len()
        ),
    )
}

fn product_decomposition() -> Check {
    let mut checked = 0;
    let mut fails = 0;
    for (w, _) in random_weights(7, 20, 4, 8) {
        for n in 0..=8 {
            for d in product_decomposition_row(&w, n).unwrap() {
                checked += 1;
                if d.lhs != d.rhs {
                    fails += 1;
                }
            }
        }
    }
    check(
        fails == 0,
        format!("{checked} (instance, N, m) triples, {fails} mismatches"),
    )
}

fn identity_battery(summary: &CampaignSummary) -> Check {
    let claims = [
        Claim::Eq5,
        Claim::Eq7,
        Claim::Eq11,
        Claim::ZeroRowSum,
        Claim::MeanTotal,
        Claim::Eq13Product,
    ];
    let mut per_claim = Vec::new();
    let mut bad = 0;
    for c in claims {
        let reports: Vec<_> = summary.reports.iter().filter(|r| r.claim == c).collect();
        let instances: std::collections::BTreeSet<u64> =
            reports.iter().map(|r| r.instance.id).collect();
        bad += reports
            .iter()
            .filter(|r| r.verdict != Verdict::PassStrict)
            .count();
        if instances.len() as u64 != summary.instances {
            bad += 1;
        }
        per_claim.push(format!("{}={}", c.id(), reports.len()));
    }
    check(
        bad == 0,
        format!(
            "{} on {} instances, {bad} inexact",
            per_claim.join(" "),
            summary.instances
        ),
    )
}

fn performance() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;

    let weights: Vec<LogFloat> = (0..2000)
        .map(|i| LogFloat::from_ln(-(i as f64) * 1e-3).unwrap())
        .collect();
    let w = WeightVector::new(weights).unwrap();
    let start = Instant::now();
    let z = z_powersum(&w, 2000);
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 5.0 && z.get(2000).ln().is_finite();
    notes.push(format!("Z L=2000 N=2000 {secs:.2}s"));

    let energies: Vec<Rational> = (0..100).map(|i| q(i, 10)).collect();
    let levels = LevelSet::simple(energies, InverseTemperature::float(0.1).unwrap()).unwrap();
    let grid: Vec<InverseTemperature> = (1..=100)
        .map(|k| InverseTemperature::float(0.05 * k as f64).unwrap())
        .collect();
    let start = Instant::now();
    let curve = parallel::condensate_curve::<LogFloat>(&levels, 500, &grid).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let increasing = curve.windows(2).all(|p| p[0].fraction < p[1].fraction);
    ok &= secs < 10.0 && increasing;
    notes.push(format!("curve 100 points L=100 N=500 {secs:.2}s"));

    let mut worst: f64 = 0.0;
    let config = CampaignConfig {
        seed: 9,
        instances: 5,
        min_levels: 16,
        max_levels: 16,
        ..Default::default()
    };
    for id in 0..config.instances {
        let g = generate_instance(&config, id).unwrap();
        let exact = WeightVector::<Rational>::from_rationals(&g.weights).unwrap();
        let logs = WeightVector::<LogFloat>::from_rationals(&g.weights).unwrap();
        let ze = z_powersum(&exact, 64);
        let zl = z_powersum(&logs, 64);
        for n in 0..=64 {
            let a = ze.get(n).ln();
            let b = zl.get(n).ln();
            worst = worst.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    ok &= worst <= 1e-9;
    notes.push(format!("ln Z L=16 N=64 worst {worst:.1e}"));
    check(ok, notes.join(", "))
}

fn sampler() -> Check {
    let w = two_level();
    let marginal = level_marginal(&w, 2, 0).unwrap();
    let expected: Vec<f64> = marginal.probs.iter().map(|p| p.to_f64().unwrap()).collect();
    let samples = 100_000;
    let draws = Sampler::new(&w, 2).sample_many(20_240_601, samples);
    let mut hist = [0u64; 3];
    for d in &draws {
        hist[d[0]] += 1;
    }
    let chi2: f64 = hist
        .iter()
        .zip(&expected)
        .map(|(&o, &p)| {
            let e = p * samples as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new(2.0).unwrap().cdf(chi2);
    let mean = draws.iter().map(|d| d[0] as f64).sum::<f64>() / samples as f64;
    let variance = covariance_matrix(&w, 2).unwrap().covariance[0][0]
        .to_f64()
        .unwrap();
    let sigma = (variance / samples as f64).sqrt();
    let exact_mean = 10.0 / 7.0;
    let within = (mean - exact_mean).abs() <= 3.0 * sigma;
    check(
        p_value > 0.001 && within && !variance.is_zero(),
        format!(
            "chi2 {chi2:.3}, p {p_value:.3}, mean {mean:.4} vs {exact_mean:.4} (3 sigma {:.4})",
            3.0 * sigma
        ),
    )
}

fn main() {
    let config = CampaignConfig {
        seed: 42,
        instances: 100,
        min_levels: 2,
        max_levels: 5,
        min_n: 1,
        max_n: 10,
        ..Default::default()
    };
    let start = Instant::now();
    let campaign = parallel::run_campaign::<Rational>(&config).expect("campaign runs");
    let campaign_time = start.elapsed();

    let results: Vec<(&str, Check)> = vec![
        (
            "oracle equivalence, power sums vs enumeration",
            oracle_equivalence(),
        ),
        (
            "convexity lemma on fixtures and random instances",
            lemma_everywhere(),
        ),
        (
            "monotonicity theorem strict on random exact instances",
            theorem_campaign(&campaign, campaign_time),
        ),
        (
            "ground occupation beta derivative vs central difference",
            beta_derivative_vs_difference(),
        ),
        ("two-level fixture values exact", fixture_exactness()),
        ("bounded composition counts exhaustive", combinatorics()),
        (
            "product decomposition over orbit sums",
            product_decomposition(),
        ),
        (
            "identity battery on campaign instances",
            identity_battery(&campaign),
        ),
        ("performance and log-domain accuracy", performance()),
        ("sampler histogram and mean", sampler()),
    ];
    let mut failed = 0;
    for (i, (name, c)) in results.iter().enumerate() {
        println!(
            "criterion {:>2} [PRIMARY] {}: {} ({})",
            i + 1,
            name,
            if c.ok { "PASS" } else { "FAIL" },
            c.detail
        );
        if !c.ok {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
