//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::time::{Duration, Instant};

use mixpolar_core::channels::{bhattacharyya, capacity, make_bec, split_tree};
use mixpolar_core::code_design::{
    block_error_bound, default_rate_grid, max_k_at_bound, rate_curve_from, rate_gap, select_information_set,
};
use mixpolar_core::construction::{build_layout, Layout, Scheme};
use mixpolar_core::erasure_de::de_evolve;
use mixpolar_core::gf_algebra::{project_solution_subgroup, solve_affine, BitMatrix, BitVec};
use mixpolar_core::kernels::{exponent_bounds, partial_distances, CodeChain, Kernel};
use mixpolar_core::polar_process::{
    mean_information_by_level, polarization_profile, rate_of_polarization_profile, slln_tail_check, z_bound_check,
    TailMode,
};
use mixpolar_core::sc_codec::{erasure_likelihoods, sc_decode, simulate_bler, trial_rng};
use rand::Rng;

fn report(id: u32, name: &str, start: Instant, budget: Duration, ok: bool, detail: String) {
    let elapsed = start.elapsed();
    let timely = elapsed <= budget;
    let verdict = if ok && timely { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:>2} {verdict} {name}: {detail} [{:.2}s, budget {}s]",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(timely, "criterion {id} exceeded its time budget");
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn criterion_01_layout_fidelity() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("layout.json");
    let code = mixpolar_core::cli::run([
        "mixpolar",
        "layout",
        "--scheme",
        "mixed",
        "--n",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let tau: Vec<Vec<u64>> = v["channels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["indices"].as_array().unwrap().iter().map(|i| i.as_u64().unwrap()).collect())
        .collect();
    let expected: Vec<Vec<u64>> = vec![
        vec![1],
        vec![2, 3],
        vec![4],
        vec![5, 6],
        vec![7, 8],
        vec![9, 10],
        vec![11, 12],
        vec![13],
        vec![14, 15],
        vec![16],
    ];
    let ok = code == 0 && tau == expected && v["nu"] == 10;
    report(1, "layout fidelity", start, secs(1), ok, format!("nu={} channels={:?}", v["nu"], tau));
}

#[test]
fn criterion_02_glued_count_formula() {
    let start = Instant::now();
    let mut ok = true;
    let mut counts = Vec::new();
    for n in 1..=6 {
        let layout = build_layout(Scheme::Mixed, n).unwrap();
        let formula = 4f64.powi(n as i32) / 2.0 * (1.0 - 2f64.powi(-(n as i32)));
        ok &= layout.glued_channel_count() as f64 == formula;
        counts.push(layout.glued_channel_count());
    }
    report(2, "glued-count formula", start, secs(1), ok, format!("gamma(1..6)={counts:?}"));
}

#[test]
fn criterion_03_kernel_metrics() {
    let start = Instant::now();
    let g1 = partial_distances(&Kernel::g1()).unwrap();
    let chain: Vec<usize> = CodeChain::g1_chain().levels().iter().map(|l| l.params.d).collect();
    let rs4 = partial_distances(&Kernel::rs4()).unwrap();
    let e = exponent_bounds(&Kernel::rs4()).unwrap();
    let ok = g1.min == vec![1, 2, 4]
        && g1.min == chain
        && rs4.min == vec![1, 2, 3, 4]
        && rs4.max == vec![1, 2, 3, 4]
        && (e.e1 - 0.57312).abs() <= 1e-5
        && (e.e2 - 0.57312).abs() <= 1e-5;
    report(
        3,
        "kernel metrics",
        start,
        secs(5),
        ok,
        format!("g1={:?} chain d={chain:?} g2={:?} E1={:.6} E2={:.6}", g1.min, rs4.min, e.e1, e.e2),
    );
}

#[test]
fn criterion_04_oracle_equivalence() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 1..=2 {
        let layout = build_layout(Scheme::Mixed, n).unwrap();
        for eps in [0.1, 0.5, 0.9] {
            let de = de_evolve(&layout, eps).unwrap();
            let oracle = split_tree(&layout, &make_bec(eps).unwrap()).unwrap();
            for (w, c) in oracle.last().unwrap().iter().zip(&de.channels) {
                worst = worst.max((c.metrics.i - capacity(w)).abs());
                worst = worst.max((c.metrics.z - bhattacharyya(w).z).abs());
            }
        }
    }
    report(4, "oracle equivalence", start, secs(30), worst <= 1e-12, format!("max |delta|={worst:.3e}"));
}

#[test]
fn criterion_05_martingale_conservation() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for eps in [0.1, 0.5, 0.9] {
        for m in mean_information_by_level(eps, 7).unwrap() {
            worst = worst.max((m - (1.0 - eps)).abs());
        }
    }
    report(5, "martingale conservation", start, secs(60), worst <= 1e-9, format!("max |E[I_n]-(1-eps)|={worst:.3e}"));
}

#[test]
fn criterion_06_polarization_trend() {
    let start = Instant::now();
    let p = polarization_profile(0.5, 7, 0.1).unwrap();
    let ok = p[2..].windows(2).all(|w| w[1] < w[0]);
    report(6, "polarization trend", start, secs(60), ok, format!("mass(n=2..7)={:?}", &p[2..]));
}

#[test]
fn criterion_07_z_recursion_bounds() {
    let start = Instant::now();
    let r = z_bound_check(0.5, 7).unwrap();
    report(
        7,
        "Z-recursion bounds",
        start,
        secs(60),
        r.violations() == 0 && r.edges > 0,
        format!("edges={} upper={} lower={}", r.edges, r.upper_violations, r.lower_violations),
    );
}

#[test]
fn criterion_08_scheme_ordering() {
    let start = Instant::now();
    let grid = default_rate_grid();
    let curves: Vec<_> = Scheme::ALL
        .iter()
        .map(|&s| rate_curve_from(&de_evolve(&build_layout(s, 7).unwrap(), 0.5).unwrap(), &grid).unwrap())
        .collect();
    let (mixed, arikan, rs4) = (&curves[0], &curves[1], &curves[2]);
    let mut ordered = true;
    for i in 0..grid.len() {
        if grid[i] < 0.30 - 1e-9 || grid[i] > 0.55 + 1e-9 {
            continue;
        }
        ordered &= mixed[i].bound <= rs4[i].bound && mixed[i].bound <= arikan[i].bound;
    }
    let gaps: Vec<f64> = (4..=7)
        .map(|n| rate_gap(Scheme::Mixed, Scheme::Rs4Top, n, 0.5, 1e-3).unwrap())
        .collect();
    let shrinking = gaps.windows(2).all(|w| w[1] <= w[0]);
    report(
        8,
        "scheme ordering and rate gap",
        start,
        secs(300),
        ordered && shrinking,
        format!("ordering at rates 0.30..0.55 {ordered}; gap(n=4..7)={gaps:?}"),
    );
}

#[test]
fn criterion_09_rate_of_polarization() {
    let start = Instant::now();
    let low: Vec<f64> = rate_of_polarization_profile(0.5, 7, 0.40).unwrap()[4..]
        .iter()
        .map(|r| r.mass_below_threshold)
        .collect();
    let high: Vec<f64> = rate_of_polarization_profile(0.5, 7, 0.80).unwrap()[4..]
        .iter()
        .map(|r| r.mass_above_threshold)
        .collect();
    let ok = low.windows(2).all(|w| w[1] > w[0])
        && low.iter().all(|&m| m <= 0.5)
        && high.windows(2).all(|w| w[1] > w[0])
        && high.iter().all(|&m| m <= 1.0);
    report(
        9,
        "rate-of-polarization trends",
        start,
        secs(120),
        ok,
        format!("beta=0.4 below={low:?}; beta=0.8 above={high:?}"),
    );
}

#[test]
fn criterion_10_slln_tail() {
    let start = Instant::now();
    let e1 = exponent_bounds(&Kernel::rs4()).unwrap().e1;
    let r = slln_tail_check(200, 10_000, 2024, TailMode::Full).unwrap();
    report(
        10,
        "SLLN with tail",
        start,
        secs(60),
        (r.mean - e1).abs() <= 0.02,
        format!("mean={:.5} target={e1:.5} std_dev={:.4}", r.mean, r.std_dev),
    );
}

/// Ambiguity of each information channel given correct earlier decisions,
/// computed directly from the generator matrix and the erasure pattern.
fn genie_ambiguity(layout: &Layout, m: &BitMatrix, erased: &[bool], info: &[usize]) -> bool {
    let n = layout.block_bits();
    info.iter().any(|&p| {
        let c = layout.channels()[p];
        let mut cols: Vec<BitVec> = (0..c.start).map(|b| BitVec::unit(n, b)).collect();
        for j in (0..n).filter(|&j| !erased[j]) {
            let mut col = BitVec::zeros(n);
            for r in 0..n {
                col.set(r, m.get(r, j));
            }
            cols.push(col);
        }
        let mut a = BitMatrix::zeros(n, cols.len());
        for (k, col) in cols.iter().enumerate() {
            for r in 0..n {
                a.set(r, k, col.get(r));
            }
        }
        let sol = solve_affine(&a, &BitVec::zeros(cols.len())).unwrap();
        !project_solution_subgroup(&sol, c.start, c.width).unwrap().is_trivial()
    })
}

#[test]
fn criterion_11_codec_soundness() {
    let start = Instant::now();
    let mut rng = trial_rng(11, 0);

    let mut round_trips = true;
    for scheme in Scheme::ALL {
        for n in 1..=5 {
            let layout = build_layout(scheme, n).unwrap();
            let de = de_evolve(&layout, 0.5).unwrap();
            let all = select_information_set(&de, layout.block_bits()).unwrap();
            for _ in 0..100 {
                let bits: Vec<u8> = (0..layout.block_bits()).map(|_| rng.gen::<u8>() & 1).collect();
                let u = BitVec::from_bits(&bits);
                let x = layout.encode(&u).unwrap();
                let out = sc_decode(&layout, &erasure_likelihoods(&layout, &x, &vec![false; x.len()]), &all).unwrap();
                round_trips &= out.u == u && !out.any_ambiguous();
            }
        }
    }

    let mut agree = 0;
    let mut patterns = 0;
    for scheme in Scheme::ALL {
        let layout = build_layout(scheme, 2).unwrap();
        let m = layout.equivalent_generator_matrix().unwrap();
        let de = de_evolve(&layout, 0.5).unwrap();
        let info = select_information_set(&de, 8).unwrap();
        for _ in 0..1000 {
            let mut u = BitVec::zeros(16);
            for &p in &info.selected {
                let c = layout.channels()[p];
                for b in c.start..c.start + c.width {
                    u.set(b, rng.gen());
                }
            }
            let erased: Vec<bool> = (0..16).map(|_| rng.gen_bool(0.5)).collect();
            let x = layout.encode(&u).unwrap();
            let out = sc_decode(&layout, &erasure_likelihoods(&layout, &x, &erased), &info).unwrap();
            let wrong = out.u != u;
            let truth = genie_ambiguity(&layout, &m, &erased, &info.selected);
            patterns += 1;
            if out.any_ambiguous() == truth && (!wrong || truth) {
                agree += 1;
            }
        }
    }

    let layout = build_layout(Scheme::Mixed, 4).unwrap();
    let de = de_evolve(&layout, 0.5).unwrap();
    let k = max_k_at_bound(&de, 0.05).unwrap();
    let info = select_information_set(&de, k).unwrap();
    let bound = block_error_bound(&de, &info);
    let est = simulate_bler(&layout, &info, 0.5, 10_000, 99).unwrap();
    let within = est.bler <= bound + 3.0 * est.stderr;

    report(
        11,
        "codec soundness",
        start,
        secs(300),
        round_trips && agree == patterns && within,
        format!(
            "round trips {round_trips}; failure<=>ambiguity {agree}/{patterns}; N=256 K={k} bler={:.4}+-{:.4} bound={bound:.4}",
            est.bler, est.stderr
        ),
    );
}
