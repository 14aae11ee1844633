//! Exit-gate checks. Every criterion prints one `[PASS]`/`[FAIL]` line.
//!
//! Criteria 1-4 and 9 run with `cargo test`. The Monte Carlo criteria 5-8 and
//! the exhaustive fault-pair enumeration take CPU-hours and are ignored by
//! default; run them with
//! `cargo test --release -p bm-analysis --test acceptance -- --ignored --nocapture`.
//! `BM_SHOTS_SCALE` (default 1) scales their shot counts; their points are
//! checkpointed under the cargo target directory so reruns resume.

#[path = "acceptance/oracles.rs"]
mod oracles;

use std::io::Write;
use std::path::PathBuf;

use bm_analysis::fit::{fit_exponent_scaling, AnsatzDatum};
use bm_analysis::montecarlo::{NoiseAxis, SweepGrid};
use bm_analysis::overhead::{physical_from_cnot, CSS_X_REFERENCE, CSS_Z_REFERENCE, XY_REFERENCE};
use bm_analysis::{fit_threshold, run_points, solve_overhead, spam_ratio, z_distance_scan, CodeSpec, DecoderSpec, MonteCarloPoint, OverheadModel, PointSpec};
use bm_core::circuit::{attach_noise, build_memory_experiment, Circuit, MemoryBasis, NoiseModel, Spam};
use bm_core::dem::{build_dem, site_effects, DetectorErrorModel};
use bm_core::distance::z_type_distance;
use bm_core::gf2::{BinaryMatrix, BitVec};
use bm_core::layout::{build_css, build_xy, build_xy_deformed, SurfaceCodeLayout};
use bm_core::sampler::inject_fault;
use bm_decode::{mwpm_decode, run_bp, BPConfig, Decoder, DecoderConfig, DecoderKind, MatchingGraph, TannerGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Written to the stderr handle directly, which the test harness does not
/// capture, so the verdicts show up in a plain `cargo test` log.
fn report(id: &str, name: &str, pass: bool, detail: &str) -> bool {
    let line = format!("[{}] criterion {id}: {name} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    pass
}

fn noisy_circuit(layout: &SurfaceCodeLayout, rounds: usize, p: f64, eta: f64) -> Circuit {
    let c = build_memory_experiment(layout, rounds, MemoryBasis::X, Spam::Noisy).unwrap();
    attach_noise(&c, &NoiseModel::new(p, eta).unwrap())
}

fn shots(nominal: u64) -> u64 {
    let scale: f64 = std::env::var("BM_SHOTS_SCALE").ok().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    ((nominal as f64 * scale).round() as u64).max(64)
}

fn checkpoint(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("acceptance-{name}.jsonl"))
}

fn progress(p: &MonteCarloPoint, cached: bool) {
    let s = &p.spec;
    eprintln!(
        "  {} {} p_cx={:.5} eta={} shots={} failures={}{}",
        s.code,
        s.decoder.kind,
        p.p_cx,
        s.eta,
        s.shots,
        p.failures,
        if cached { " (checkpoint)" } else { "" }
    );
}

// ---------------------------------------------------------------------------
// 1. Exactness suite

#[test]
fn criterion_1_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let mut mwpm_bad = 0;
    for _ in 0..500 {
        let dem = oracles::random_graph_dem(&mut rng, 12, 25);
        let g = MatchingGraph::build(&dem).unwrap();
        let defects: Vec<u32> = (0..dem.num_detectors as u32).filter(|_| rng.gen_bool(0.4)).collect();
        let want = oracles::min_pairing_weight(&g, &defects);
        let ok = match mwpm_decode(&g, &defects) {
            Ok(out) => want.is_finite() && (out.matched_weight.unwrap() - want).abs() <= 1e-5 * want.max(1.0) && g.boundary_of(&out.edges) == defects,
            Err(_) => want.is_infinite(),
        };
        mwpm_bad += usize::from(!ok);
    }

    let mut bp_worst = 0.0f64;
    let mut trees = 0;
    while trees < 200 {
        let total = rng.gen_range(3..=22);
        let (nc, checks) = oracles::random_tree(&mut rng, total);
        if nc == 0 || checks.len() > 14 {
            continue;
        }
        let vars: Vec<(Vec<u32>, f64)> = checks.into_iter().map(|c| (c, rng.gen_range(0.01..0.45))).collect();
        let graph = TannerGraph::new(nc, &vars).unwrap();
        let x = BitVec::from_bools(&(0..vars.len()).map(|_| rng.gen_bool(0.3)).collect::<Vec<_>>());
        let syndrome = graph.syndrome_of(&x);
        let cfg = BPConfig { max_iter: 2 * (nc + vars.len()), stop_on_convergence: false, ..Default::default() };
        let got = run_bp(&graph, &syndrome, &cfg).unwrap().posteriors;
        let want = oracles::brute_marginals(nc, &vars, &syndrome);
        bp_worst = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(bp_worst, f64::max);
        trees += 1;
    }

    let circuit = noisy_circuit(&build_xy(3).unwrap(), 3, 0.01, 100.0);
    let (mut outcomes, mut dem_bad) = (0, 0);
    for effects in site_effects(&circuit) {
        for (outcome, _, sig) in &effects.outcomes {
            let injected = inject_fault(&circuit, effects.site, *outcome).unwrap();
            let mask = injected.observables.iter().fold(0u64, |m, &o| m ^ (1 << o));
            outcomes += 1;
            dem_bad += usize::from(injected.detectors != sig.detectors || mask != sig.observables);
        }
    }

    let mut gf2_bad = 0;
    for _ in 0..300 {
        let rows = rng.gen_range(1..40);
        let cols = rng.gen_range(1..90);
        let density = rng.gen_range(0.05..0.6);
        let dense: Vec<Vec<u8>> = (0..rows).map(|_| (0..cols).map(|_| u8::from(rng.gen_bool(density))).collect()).collect();
        let m = BinaryMatrix::from_dense(&dense);
        let rank = oracles::naive_rank(dense.clone());
        let kernel = m.kernel();
        let in_kernel = kernel.iter().all(|v| m.mul_vec(v).is_zero());
        let independent = bm_core::gf2::rank_of(&kernel) == kernel.len();
        gf2_bad += usize::from(m.rank() != rank || kernel.len() != cols - rank || !in_kernel || !independent);
    }

    let pass = mwpm_bad == 0 && bp_worst < 1e-8 && dem_bad == 0 && gf2_bad == 0;
    let detail = format!(
        "MWPM mismatches {mwpm_bad}/500; BP max marginal error {bp_worst:.1e} over 200 trees; DEM vs injection mismatches {dem_bad}/{outcomes}; GF(2) mismatches {gf2_bad}/300"
    );
    assert!(report("1", "exactness suite", pass, &detail), "{detail}");
}

// ---------------------------------------------------------------------------
// 2. Distance suite

/// Correction check at p = 0.005, eta = 1: weights from this noise point,
/// syndromes from individual DEM mechanisms or pairs of them.
struct FaultCheck {
    dem: DetectorErrorModel,
    decoder: Decoder,
}

impl FaultCheck {
    fn new(layout: &SurfaceCodeLayout) -> Self {
        let d = layout.d_x;
        let dem = build_dem(&noisy_circuit(layout, d, 0.005, 1.0)).unwrap();
        let decoder = Decoder::new(&dem.decompose_hyperedges().unwrap(), DecoderConfig::new(DecoderKind::BeliefMatching)).unwrap();
        Self { dem, decoder }
    }

    fn fails(&self, mechanisms: &[usize]) -> bool {
        let mut syndrome = BitVec::zeros(self.dem.num_detectors);
        let mut observables = 0u64;
        for &m in mechanisms {
            let mech = &self.dem.mechanisms[m];
            for &d in &mech.detectors {
                syndrome.toggle(d as usize);
            }
            observables ^= mech.observable_mask();
        }
        self.decoder.decode(&syndrome).unwrap().observables != observables
    }

    fn num_pairs(&self) -> u64 {
        let m = self.dem.mechanisms.len() as u64;
        m * (m - 1) / 2
    }

    /// Pair with linear index `k` in row-major order over `i < j`.
    fn pair(&self, mut k: u64) -> (usize, usize) {
        let m = self.dem.mechanisms.len() as u64;
        let mut i = 0;
        while k >= m - 1 - i {
            k -= m - 1 - i;
            i += 1;
        }
        (i as usize, (i + 1 + k) as usize)
    }
}

#[test]
fn criterion_2_distance_suite() {
    let mut distances = Vec::new();
    let mut distance_ok = true;
    for d in [3usize, 5] {
        for layout in [build_css(d, d).unwrap(), build_xy(d).unwrap()] {
            let got = build_dem(&noisy_circuit(&layout, d, 0.001, 1.0)).unwrap().circuit_distance(d);
            distance_ok &= got == Some(d);
            distances.push(format!("{:?} d={d}: {got:?}", layout.family));
        }
    }

    let mut single_failures = 0;
    let mut singles = 0;
    for layout in [build_css(3, 3).unwrap(), build_xy(3).unwrap()] {
        let check = FaultCheck::new(&layout);
        for m in 0..check.dem.mechanisms.len() {
            singles += 1;
            single_failures += usize::from(check.fails(&[m]));
        }
    }

    // A deterministic stride through every mechanism pair; the exhaustive
    // enumeration is `criterion_2_fault_pairs_exhaustive`.
    const SAMPLED: u64 = 1500;
    let mut pair_failures = 0;
    let mut pairs_total = 0;
    for layout in [build_css(5, 5).unwrap(), build_xy(5).unwrap()] {
        let check = FaultCheck::new(&layout);
        let total = check.num_pairs();
        pairs_total += total;
        let stride = total / SAMPLED;
        for s in 0..SAMPLED {
            let (i, j) = check.pair(s * stride + s % stride.max(1));
            pair_failures += usize::from(check.fails(&[i, j]));
        }
    }

    let structural = distance_ok && single_failures == 0;
    report(
        "2a",
        "circuit distance and d=3 single faults",
        structural,
        &format!("{}; belief-matching single-fault failures {single_failures}/{singles}", distances.join(", ")),
    );
    // A passing sample is not the criterion: the exhaustive run mis-corrects
    // 1157 pairs per code (about 0.08%), mostly after non-converged BP.
    report(
        "2b-sample",
        "d=5 fault pairs corrected by belief-matching (stride sample only)",
        pair_failures == 0,
        &format!(
            "{pair_failures} mis-corrected among {} stride-sampled pairs (of {pairs_total}); full enumeration is the ignored test criterion_2_fault_pairs_exhaustive",
            2 * SAMPLED
        ),
    );
    // 2b is a known shortfall of the belief-matching pipeline and is recorded
    // rather than asserted here. The exhaustive ignored test asserts it.
    assert!(structural);
}

#[test]
#[ignore = "enumerates about 1.4 million fault pairs per code, about two CPU-hours"]
fn criterion_2_fault_pairs_exhaustive() {
    let mut counts = Vec::new();
    let mut total = 0u64;
    for layout in [build_css(5, 5).unwrap(), build_xy(5).unwrap()] {
        let check = FaultCheck::new(&layout);
        let m = check.dem.mechanisms.len();
        let bad: usize = (0..m).map(|i| ((i + 1)..m).filter(|&j| check.fails(&[i, j])).count()).sum();
        total += check.num_pairs();
        counts.push((layout.family, bad));
    }
    let pass = counts.iter().all(|c| c.1 == 0);
    report("2b", "d=5 fault pairs corrected by belief-matching (exhaustive)", pass, &format!("mis-corrected {counts:?} of {total} pairs"));
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 3. Z-distance / fragility suite

/// Minimum weight of a Z-type operator that commutes with every stabilizer
/// and anticommutes with some logical, by dense elimination and enumeration.
fn z_distance_oracle(layout: &SurfaceCodeLayout) -> Option<usize> {
    let code = layout.to_code();
    let n = code.num_qubits();
    let mut rows: Vec<Vec<u8>> = code.stabilizers.iter().map(|s| (0..n).map(|q| u8::from(s.x_bits().get(q))).collect()).collect();
    // Reduced row echelon form, then read the kernel off the free columns.
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] == 1) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i][c] == 1 {
                let pivot = rows[r].clone();
                for (a, b) in rows[i].iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let basis: Vec<Vec<u8>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![0u8; n];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = rows[i][f];
            }
            v
        })
        .collect();
    assert!(basis.len() <= 20, "kernel too large for the oracle");
    let logical_x: Vec<Vec<u8>> = code.logicals().map(|l| (0..n).map(|q| u8::from(l.x_bits().get(q))).collect()).collect();
    let mut best = None;
    for mask in 1u32..1 << basis.len() {
        let mut v = vec![0u8; n];
        for (k, b) in basis.iter().enumerate() {
            if mask >> k & 1 == 1 {
                for (a, x) in v.iter_mut().zip(b) {
                    *a ^= x;
                }
            }
        }
        let logical = logical_x.iter().any(|l| l.iter().zip(&v).filter(|(a, b)| **a & **b == 1).count() % 2 == 1);
        if logical {
            let w = v.iter().filter(|&&x| x == 1).count();
            best = Some(best.map_or(w, |b: usize| b.min(w)));
        }
    }
    best
}

fn bucket(l: usize) -> f64 {
    if l % 6 == 3 {
        1.0 / 3.0
    } else {
        5.0 / 9.0
    }
}

#[test]
fn criterion_3_z_distance() {
    let mut notes = Vec::new();
    let mut pass = true;

    for l in [3usize, 5, 7, 9] {
        let d = z_type_distance(&build_xy(l).unwrap().to_code()).unwrap().distance;
        pass &= d == Some(l * l);
        notes.push(format!("xy L={l}: {d:?}"));
    }

    let rows = z_distance_scan(&[15, 17, 19], true).unwrap();
    for row in &rows {
        let oracle = z_distance_oracle(&build_xy_deformed(row.l).unwrap().0);
        let ratio = row.ratio.unwrap_or(f64::NAN);
        let other = if bucket(row.l) > 0.5 { 1.0 / 3.0 } else { 5.0 / 9.0 };
        let nearer = (ratio - bucket(row.l)).abs() < (ratio - other).abs();
        pass &= row.d_z == oracle && nearer;
        notes.push(format!("deformed L={}: d_Z={:?} oracle={oracle:?} d_Z/n={ratio:.4}", row.l, row.d_z));
    }

    // Within each residue class mod 6 the distance is quadratic in L; its
    // leading coefficient is the large-L limit of d_Z/n.
    for class in [[9usize, 15, 21], [7, 13, 19], [11, 17, 23]] {
        let d: Vec<f64> = z_distance_scan(&class, true).unwrap().iter().map(|r| r.d_z.unwrap() as f64).collect();
        let h = (class[1] - class[0]) as f64;
        let limit = (d[2] - 2.0 * d[1] + d[0]) / (2.0 * h * h);
        let want = bucket(class[0]);
        let ok = ((limit - want) / want).abs() <= 0.02;
        pass &= ok;
        notes.push(format!("L={class:?} limit {limit:.4} (bucket {want:.4})"));
    }

    let detail = notes.join("; ");
    assert!(report("3", "Z-distance and deformed-boundary ratios", pass, &detail), "{detail}");
}

// ---------------------------------------------------------------------------
// 4. Overhead solver

#[test]
fn criterion_4_overhead() {
    let p = physical_from_cnot(1e-3, 100.0);
    let target = 1e-12;
    let xy = solve_overhead(&OverheadModel::Xy { fit: XY_REFERENCE }, p, target).unwrap();
    let square = solve_overhead(&OverheadModel::SquareCss { x: CSS_X_REFERENCE, z: CSS_Z_REFERENCE }, p, target).unwrap();
    let rect = solve_overhead(&OverheadModel::RectCss { x: CSS_X_REFERENCE, z: CSS_Z_REFERENCE }, p, target).unwrap();
    let pass = xy.qubits == 1057 && square.qubits == 1921 && rect.qubits == 681;
    let detail = format!(
        "XY L={} -> {} qubits; square CSS L={} -> {}; rectangular CSS {}x{} -> {}",
        xy.d_x, xy.qubits, square.d_x, square.qubits, rect.d_x, rect.d_z, rect.qubits
    );
    assert!(report("4", "teraquop overhead", pass, &detail), "{detail}");
}

// ---------------------------------------------------------------------------
// 5-8. Monte Carlo criteria (slow)

fn grid(codes: Vec<CodeSpec>, decoders: &[DecoderKind], p_cx: Vec<f64>, eta: f64, shots: u64, base_seed: u64) -> SweepGrid {
    SweepGrid {
        codes,
        decoders: decoders.iter().map(|&k| DecoderSpec::new(k)).collect(),
        noise: p_cx,
        axis: NoiseAxis::CnotInfidelity,
        etas: vec![eta],
        rounds: None,
        spam: Spam::Noisy,
        shots,
        base_seed,
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
#[ignore = "about one CPU-hour"]
fn criterion_5_decoder_advantage() {
    let g = grid(vec![CodeSpec::xy(5)], &[DecoderKind::Mwpm, DecoderKind::BeliefMatching], vec![0.0027], 100.0, shots(2_000_000), 5);
    let points = run_points(&g.expand().unwrap(), Some(&checkpoint("c5")), progress).unwrap();
    let (mwpm, bm) = (&points[0], &points[1]);
    let factor = mwpm.rate() / bm.rate();
    let pass = (4.0..=12.0).contains(&factor);
    let detail = format!("MWPM {:.3e} ({} fails), belief-matching {:.3e} ({} fails), factor {factor:.2}", mwpm.rate(), mwpm.failures, bm.rate(), bm.failures);
    assert!(report("5", "belief-matching advantage at L=5 XY, eta=100", pass, &detail), "{detail}");
}

fn threshold_case(label: &str, codes: &[CodeSpec], kind: DecoderKind, p_cx: Vec<f64>, eta: f64, expected: f64, tol: f64) -> (bool, String, f64, f64) {
    let g = grid(codes.to_vec(), &[kind], p_cx, eta, shots(100_000), 6);
    let points = run_points(&g.expand().unwrap(), Some(&checkpoint(&format!("c6-{label}-{kind}"))), progress).unwrap();
    match fit_threshold(&points) {
        Ok(fit) => {
            let ok = (fit.p_th - expected).abs() <= tol;
            (ok, format!("{label} {kind}: {:.4}% +- {:.4}% (want {:.3}% +- {:.2}%)", 100.0 * fit.p_th, 100.0 * fit.sigma_pth, 100.0 * expected, 100.0 * tol), fit.p_th, fit.sigma_pth)
        }
        Err(e) => (false, format!("{label} {kind}: fit failed: {e}"), f64::NAN, f64::NAN),
    }
}

#[test]
#[ignore = "tens of CPU-hours"]
fn criterion_6_thresholds() {
    let css: Vec<CodeSpec> = [5, 7, 9, 11].iter().map(|&l| CodeSpec::css(l, l)).collect();
    let xy: Vec<CodeSpec> = [5, 7, 9, 11].iter().map(|&l| CodeSpec::xy(l)).collect();
    let css_grid = linspace(0.0065, 0.0110, 10);
    let cases = [
        ("css", &css, DecoderKind::Mwpm, css_grid.clone(), 1.0, 0.00817, 0.0007),
        ("css", &css, DecoderKind::BeliefMatching, css_grid.clone(), 1.0, 0.00940, 0.0007),
        ("css", &css, DecoderKind::UnionFind, css_grid.clone(), 1.0, 0.00795, 0.0007),
        ("css", &css, DecoderKind::BeliefFind, css_grid, 1.0, 0.00937, 0.0007),
        ("xy", &xy, DecoderKind::Mwpm, linspace(0.0038, 0.0062, 7), 100.0, 0.00498, 0.0008),
        ("xy", &xy, DecoderKind::BeliefMatching, linspace(0.0070, 0.0100, 7), 100.0, 0.00841, 0.0008),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    let mut fits = Vec::new();
    for (label, codes, kind, ps, eta, want, tol) in cases {
        let (ok, note, p_th, sigma) = threshold_case(label, codes, kind, ps, eta, want, tol);
        pass &= ok;
        notes.push(note);
        fits.push((p_th, sigma));
    }
    let detail = notes.join("; ");
    report("6", "threshold reproduction", pass, &detail);
    let (mwpm, bm, bf) = (fits[0], fits[1], fits[3]);
    let ordered = bm.0 > mwpm.0 && (bm.0 - bf.0).abs() <= 2.0 * bm.1.hypot(bf.1);
    report("6-order", "belief-matching above MWPM, belief-find level with belief-matching", ordered, &format!("{mwpm:?} {bm:?} {bf:?}"));
    assert!(pass && ordered, "{detail}");
}

#[test]
#[ignore = "several CPU-hours"]
fn criterion_7_exponent_scaling() {
    let codes: Vec<CodeSpec> = [5, 7, 9].iter().map(|&l| CodeSpec::xy(l)).collect();
    let g = grid(codes, &[DecoderKind::BeliefMatching], vec![0.0020, 0.0025, 0.0030, 0.0035], 100.0, shots(500_000), 7);
    let points = run_points(&g.expand().unwrap(), Some(&checkpoint("c7")), progress).unwrap();
    let data: Vec<AnsatzDatum> = points.iter().map(AnsatzDatum::from_point).collect();
    let (pass, detail) = match fit_exponent_scaling(&data) {
        Ok(fit) => ((fit.beta - 1.0).abs() <= 0.15, format!("exponent multiplier {:.3} +- {:.3} (ansatz 1)", fit.beta, fit.beta_err)),
        Err(e) => (false, format!("fit failed: {e}")),
    };
    assert!(report("7", "below-threshold exponent (sqrt(n)+1)/2", pass, &detail), "{detail}");
}

#[test]
#[ignore = "several CPU-hours"]
fn criterion_8_spam_ordering() {
    let spec = |code: CodeSpec, eta: f64| {
        let p = 0.015;
        PointSpec {
            code,
            decoder: DecoderSpec::new(DecoderKind::BeliefMatching),
            p,
            eta,
            rounds: 7,
            spam: Spam::Noisy,
            shots: shots(100_000),
            seed: bm_analysis::derive_seed(8, &code, p, eta, 7, Spam::Noisy),
        }
    };
    let xy1 = spam_ratio(&spec(CodeSpec::xy(7), 1.0)).unwrap();
    let xy100 = spam_ratio(&spec(CodeSpec::xy(7), 100.0)).unwrap();
    let xy_ok = xy100.ratio - xy1.ratio >= 3.0 * xy1.sigma.hypot(xy100.sigma);
    let css: Vec<f64> = [1.0, 10.0, 100.0].iter().map(|&eta| spam_ratio(&spec(CodeSpec::css(7, 7), eta)).unwrap().ratio).collect();
    let spread = css.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / css.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = xy_ok && spread < 2.0;
    let detail = format!(
        "XY ratio {:.3}+-{:.3} (eta=1) vs {:.3}+-{:.3} (eta=100); CSS ratios {css:.3?} spread {spread:.2}x",
        xy1.ratio, xy1.sigma, xy100.ratio, xy100.sigma
    );
    assert!(report("8", "SPAM sensitivity ordering", pass, &detail), "{detail}");
}

// ---------------------------------------------------------------------------
// 9. Reproducibility

#[test]
fn criterion_9_reproducibility() {
    let g = grid(
        vec![CodeSpec::css(3, 3), CodeSpec::xy(3)],
        &[DecoderKind::Mwpm, DecoderKind::UnionFind, DecoderKind::BeliefMatching, DecoderKind::BeliefFind],
        vec![0.004, 0.008],
        1.0,
        1000,
        9,
    );
    let specs = g.expand().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let first = run_points(&specs, Some(&dir.path().join("a.jsonl")), |_, _| {}).unwrap();
    let second = run_points(&specs, None, |_, _| {}).unwrap();
    // Resume from a checkpoint holding only the first half.
    let partial = dir.path().join("b.jsonl");
    run_points(&specs[..specs.len() / 2], Some(&partial), |_, _| {}).unwrap();
    let mut reused = 0;
    let resumed = run_points(&specs, Some(&partial), |_, cached| reused += usize::from(cached)).unwrap();

    let counts = |v: &[MonteCarloPoint]| v.iter().map(|p| p.failures).collect::<Vec<_>>();
    let pass = counts(&first) == counts(&second) && counts(&first) == counts(&resumed) && reused == specs.len() / 2;
    let detail = format!("{} points, failures {:?}; resumed run reused {reused}", specs.len(), counts(&first));
    assert!(report("9", "bit-identical reruns", pass, &detail), "{detail}");
}

/// The ignored criteria produce no verdict in a default run. Report them as
/// failing here so the log has a line for every criterion; running the
/// ignored tests replaces these with measured verdicts.
#[test]
fn criteria_not_run_by_default() {
    let skipped = [
        ("2b", "d=5 fault pairs corrected by belief-matching (exhaustive)", "criterion_2_fault_pairs_exhaustive"),
        ("5", "belief-matching advantage at L=5 XY, eta=100", "criterion_5_decoder_advantage"),
        ("6", "threshold reproduction", "criterion_6_thresholds"),
        ("7", "below-threshold exponent (sqrt(n)+1)/2", "criterion_7_exponent_scaling"),
        ("8", "SPAM sensitivity ordering", "criterion_8_spam_ordering"),
    ];
    for (id, name, test) in skipped {
        report(id, name, false, &format!("not run: ignored test {test}, needs CPU-hours; run with --ignored"));
    }
}
