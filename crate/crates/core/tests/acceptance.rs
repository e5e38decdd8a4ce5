//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use irsbd::harness::{csv_string, dbm_to_watts, mean_std, run_samples, run_sweep, ScenarioConfig, SweepContext, SweepSamples};
use irsbd::irs::{cascade, design_phase, PhaseProfile};
use irsbd::matgebra::{complex_gaussian, normalize_phase, svd, CMatrix};
use irsbd::metrics::{sinr_ue1, sinr_ue2, NoiseModel};
use irsbd::scene::{build_geometry, draw_large_scale, pathloss_db, Layout, Link};
use irsbd::txrx::{build_combiners, CombinerSet, EffectiveChannels, MethodId, PrecoderSet};

type M = CMatrix<f64>;
type C = Complex<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const SEED: u64 = 20_240_917;

fn default_cfg(realizations: usize) -> ScenarioConfig {
    ScenarioConfig { realizations, seed: SEED, ..ScenarioConfig::default() }
}

fn exact_nulling() -> Outcome {
    let ctx = SweepContext::new(&default_cfg(100)).unwrap();
    let mut worst = 0.0f64;
    for r in 0..100 {
        let draw = ctx.draw::<f64>(r).unwrap();
        for m in MethodId::ALL {
            let (_, pre) = ctx.design(&draw, m, r).unwrap();
            for (_, res) in pre.null_residuals() {
                worst = worst.max(res);
            }
        }
    }
    outcome(worst <= 1e-8, format!("worst relative residual {worst:.3e} over 100 draws x 4 methods"))
}

fn rel_product(w: &M, x: &M, f: &M) -> f64 {
    (&(&w.adjoint() * x) * f).norm_fro() / (w.norm_fro() * x.norm_fro() * f.norm_fro())
}

fn fib_ue2_isolation() -> Outcome {
    let cfg = default_cfg(100);
    let ctx = SweepContext::new(&cfg).unwrap();
    let mut worst = [0.0f64; 2];
    for r in 0..100 {
        let draw = ctx.draw::<f64>(r).unwrap();
        let (eff, base) = ctx.design(&draw, MethodId::Fib, r).unwrap();
        let reflected = eff.ue2_reflected.as_ref().unwrap();
        for &dbm in &cfg.power_sweep_dbm {
            let pre = base.rescaled(dbm_to_watts(dbm)).unwrap();
            let comb = build_combiners(&eff, &pre).unwrap();
            worst[0] = worst[0].max(rel_product(&comb.w2, &eff.ue2_direct, &pre.f1));
            worst[1] = worst[1].max(rel_product(&comb.w2, reflected, &pre.f1));
        }
    }
    outcome(
        worst.iter().all(|&w| w <= 1e-8),
        format!("max W2ᴴH2F1 {:.3e}, max W2ᴴG2ΩJF1 {:.3e}", worst[0], worst[1]),
    )
}

/// Mean-SE slope per dBm between two sweep points.
fn slope(samples: &SweepSamples, method: MethodId, ue: usize, lo: f64, hi: f64) -> f64 {
    let mi = samples.method_index(method).unwrap();
    let mean_at = |p: f64| {
        let pi = samples.power_index(p).unwrap();
        let xs: Vec<f64> = samples.column(mi, pi).map(|m| if ue == 1 { m.se1 } else { m.se2 }).collect();
        mean_std(&xs).0
    };
    (mean_at(hi) - mean_at(lo)) / (hi - lo)
}

fn pib_leakage(samples: &SweepSamples) -> Outcome {
    // received leakage ‖G2ΩJ·F1‖² at the UE2 antennas, before combining
    let cfg = default_cfg(100);
    let ctx = SweepContext::new(&cfg).unwrap();
    let mut positive = true;
    let mut worst_linearity = 0.0f64;
    for r in 0..100 {
        let draw = ctx.draw::<f64>(r).unwrap();
        let (eff, base) = ctx.design(&draw, MethodId::Pib, r).unwrap();
        let leak = eff.ue2_reflected.as_ref().unwrap();
        let per_watt: Vec<f64> = cfg
            .power_sweep_dbm
            .iter()
            .map(|&dbm| {
                let w = dbm_to_watts(dbm);
                (leak * &base.rescaled(w).unwrap().f1).norm_fro_sqr() / w
            })
            .collect();
        positive &= per_watt.iter().all(|&x| x > 0.0);
        let lo = per_watt.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = per_watt.iter().cloned().fold(0.0, f64::max);
        worst_linearity = worst_linearity.max((hi - lo) / hi);
    }
    let low = slope(samples, MethodId::Pib, 2, 0.0, 10.0);
    let high = slope(samples, MethodId::Pib, 2, 20.0, 30.0);
    let ratio = high / low;
    outcome(
        positive && worst_linearity <= 1e-9 && ratio < 0.7,
        format!(
            "leakage > 0: {positive}, linearity spread {worst_linearity:.1e}; UE2 slope 0-10 dBm {low:.4}, 20-30 dBm {high:.4}, ratio {ratio:.3} (need < 0.7)"
        ),
    )
}

fn ue1_log_linear(samples: &SweepSamples) -> Outcome {
    let target = 2.0 * 10f64.log2() / 10.0;
    let pib = slope(samples, MethodId::Pib, 1, 20.0, 30.0);
    let fib = slope(samples, MethodId::Fib, 1, 20.0, 30.0);
    let ok = |s: f64| (s - target).abs() <= 0.1 * target;
    outcome(
        ok(pib) && ok(fib),
        format!("UE1 slope 20-30 dBm: PIB {pib:.4e}, FIB {fib:.4e}, target {target:.4} ±10%"),
    )
}

fn method_ordering(samples: &SweepSamples) -> Outcome {
    let chain = [MethodId::NoIrsBd, MethodId::Fib, MethodId::Pib, MethodId::NingAdapted];
    let mut ok = true;
    let mut notes = Vec::new();
    for pair in chain.windows(2) {
        let (a, b) = (samples.method_index(pair[0]).unwrap(), samples.method_index(pair[1]).unwrap());
        let mut worst_lower = f64::INFINITY;
        let mut at = 0.0;
        for (pi, &p) in samples.power_dbm.iter().enumerate() {
            if !(20.0..=30.0).contains(&p) {
                continue;
            }
            let d: Vec<f64> = samples.column(a, pi).zip(samples.column(b, pi)).map(|(x, y)| x.se_sum - y.se_sum).collect();
            let (mean, std) = mean_std(&d);
            let lower = mean - 1.96 * std / (d.len() as f64).sqrt();
            if lower < worst_lower {
                worst_lower = lower;
                at = p;
            }
        }
        let holds = worst_lower >= 0.0;
        ok &= holds;
        notes.push(format!("{}≥{} {} (min CI lower bound {worst_lower:.3e} at {at} dBm)", pair[0], pair[1], if holds { "ok" } else { "violated" }));
    }
    outcome(ok, notes.join("; "))
}

fn pathloss_formula() -> Outcome {
    let a: f64 = pathloss_db(100.0, 28.0).unwrap();
    let b: f64 = pathloss_db(1.0, 1.0).unwrap();
    // independent evaluation
    let want = 28.0 + 22.0 * 2.0 + 20.0 * 28f64.log10();
    outcome(
        (a - 100.943).abs() <= 1e-3 && (a - want).abs() <= 1e-6 && b == 28.0,
        format!("PL(100 m, 28 GHz) = {a:.6} dB (direct {want:.6}), PL(1 m, 1 GHz) = {b}"),
    )
}

fn large_scale_stats() -> Outcome {
    let geom = build_geometry(&Layout::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = 100_000;
    let mut shadow = Vec::with_capacity(n);
    let mut k = Vec::with_capacity(n);
    for _ in 0..n {
        let ls = draw_large_scale(&geom, Link::BsIrs, 28.0, &mut rng).unwrap();
        shadow.push(ls.shadow_db);
        k.push(10.0 * ls.k_factor_linear.log10());
    }
    let (_, s_std) = mean_std(&shadow);
    let (k_mean, k_std) = mean_std(&k);
    outcome(
        (s_std - 4.0).abs() <= 0.1 && (k_mean - 9.0).abs() <= 0.1 && (k_std - 3.5).abs() <= 0.1,
        format!("shadow std {s_std:.4} dB, K mean {k_mean:.4} dB, K std {k_std:.4} dB over {n} draws"),
    )
}

fn irs_phase_design() -> Outcome {
    let cfg = default_cfg(1000);
    let geom = build_geometry(&cfg.layout).unwrap();
    let params = cfg.channel_params();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_phase = 0.0f64;
    let mut wins = 0;
    for _ in 0..1000 {
        let cs = irsbd::channel::draw_channel_set::<f64, _>(&params, &geom, None, &mut rng).unwrap();
        let p = design_phase(&cs.j, &cs.g1).unwrap();
        let mut u = svd(&cs.j).unwrap().u.col(0).to_vec();
        let mut v = svd(&cs.g1).unwrap().v.col(0).to_vec();
        normalize_phase(&mut u);
        normalize_phase(&mut v);
        for n in 0..p.elements() {
            worst_phase = worst_phase.max((u[n] * v[n].conj() * p.coefficient(n)).arg().abs());
        }
        let designed = svd(&cascade(&cs.g1, &p, &cs.j).unwrap()).unwrap().singular_values[0];
        let mirror = svd(&cascade(&cs.g1, &PhaseProfile::identity(p.elements()), &cs.j).unwrap()).unwrap().singular_values[0];
        wins += usize::from(designed >= mirror);
    }
    outcome(
        worst_phase <= 1e-12 && wins >= 950,
        format!("max residual phase {worst_phase:.2e} rad; designed ≥ mirror in {wins}/1000 draws"),
    )
}

// Brute-force SINR straight from the defining expressions, entry by entry.
fn bf(a: &M, b: &M) -> M {
    CMatrix::from_fn(a.rows(), b.cols(), |i, j| (0..a.cols()).fold(C::new(0.0, 0.0), |s, k| s + a[(i, k)] * b[(k, j)]))
}

fn bh(a: &M) -> M {
    CMatrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)].conj())
}

fn sum(a: &M, b: &M) -> M {
    CMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + b[(i, j)])
}

fn inv2(m: &M) -> M {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let det = a * d - b * c;
    CMatrix::from_fn(2, 2, |i, j| [[d, -b], [-c, a]][i][j] / det)
}

fn tr2(m: &M) -> f64 {
    m[(0, 0)].re + m[(1, 1)].re
}

fn quad(w: &M, h: &M, f: &M) -> M {
    let x = bf(&bf(&bh(w), h), f);
    bf(&x, &bh(&x))
}

fn noise(w: &M, var: f64, model: NoiseModel) -> M {
    match model {
        NoiseModel::Identity => CMatrix::from_fn(2, 2, |i, j| C::new(if i == j { var } else { 0.0 }, 0.0)),
        NoiseModel::Combined => bf(&bh(w), w).scale(var),
    }
}

fn oracle(eff: &EffectiveChannels<f64>, pre: &PrecoderSet<f64>, comb: &CombinerSet<f64>, var: f64, model: NoiseModel) -> (f64, f64) {
    let g2 = eff.ue2_reflected.as_ref().unwrap();
    let r1 = sum(&noise(&comb.w1, var, model), &quad(&comb.w1, &eff.ue1, &pre.f2));
    let g1 = tr2(&bf(&quad(&comb.w1, &eff.ue1, &pre.f1), &inv2(&r1)));
    let hbar2 = sum(&eff.ue2_direct, g2);
    let r2 = sum(&noise(&comb.w2, var, model), &quad(&comb.w2, &hbar2, &pre.f1));
    let s2 = sum(&quad(&comb.w2, &eff.ue2_direct, &pre.f2), &quad(&comb.w2, g2, &pre.f2));
    (g1, tr2(&bf(&s2, &inv2(&r2))))
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let (q, p, m) = (4, 4, 8);
        let eff = EffectiveChannels {
            ue1: complex_gaussian(&mut rng, q, m),
            ue2_direct: complex_gaussian(&mut rng, p, m),
            ue2_reflected: Some(complex_gaussian::<f64, _>(&mut rng, p, m).scale(0.5)),
        };
        let pre = PrecoderSet {
            f1: complex_gaussian(&mut rng, m, 2),
            f2: complex_gaussian(&mut rng, m, 2),
            per_user_power: [1.0, 1.0],
            nulls: vec![],
        };
        let comb = CombinerSet { w1: complex_gaussian(&mut rng, q, 2), w2: complex_gaussian(&mut rng, p, 2) };
        let var = 0.05 * (1 + i % 7) as f64;
        for model in [NoiseModel::Combined, NoiseModel::Identity] {
            let (o1, o2) = oracle(&eff, &pre, &comb, var, model);
            let g1 = sinr_ue1(&eff, &pre, &comb, var, model).unwrap().gamma;
            let g2 = sinr_ue2(&eff, &pre, &comb, var, model).unwrap().gamma;
            worst = worst.max(((g1 - o1) / o1).abs()).max(((g2 - o2) / o2).abs());
        }
    }
    outcome(worst <= 1e-10, format!("worst relative deviation {worst:.2e} over 100 instances x 2 noise models"))
}

fn determinism() -> Outcome {
    let cfg = ScenarioConfig { realizations: 40, ..default_cfg(40) };
    let one = csv_string(&run_sweep::<f64>(&cfg, 1).unwrap());
    let eight = csv_string(&run_sweep::<f64>(&cfg, 8).unwrap());
    let again = csv_string(&run_sweep::<f64>(&cfg, 8).unwrap());
    outcome(one == eight && eight == again, format!("{} bytes, workers 1 vs 8 identical: {}", one.len(), one == eight))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let samples = run_samples::<f64>(&default_cfg(1000), workers).expect("default sweep");
    println!("reference sweep: 1000 realizations, 4 methods, 16 powers in {:.1?}", started.elapsed());

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("exact nulling", Box::new(exact_nulling)),
        ("FIB UE2 isolation", Box::new(fib_ue2_isolation)),
        ("PIB leakage persistence", Box::new(|| pib_leakage(&samples))),
        ("nulled-user log-linear growth", Box::new(|| ue1_log_linear(&samples))),
        ("method ordering 20-30 dBm", Box::new(|| method_ordering(&samples))),
        ("pathloss formula", Box::new(pathloss_formula)),
        ("large-scale statistics", Box::new(large_scale_stats)),
        ("IRS phase design", Box::new(irs_phase_design)),
        ("metric oracle equivalence", Box::new(metric_oracle)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let o = check();
        failed += usize::from(!o.pass);
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
