use std::sync::Arc;

use bilin_core::freewave::{init_wave, CubeRegion, FrequencyGrid, WaveState};
use bilin_core::geometry::{Domain, SurfaceKind, SurfaceSpec};
use bilin_core::quad::bump;
use bilin_core::wavepacket::*;
use bilin_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = std::f64::consts::TAU;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn surface(radius: f64, margin: f64) -> Arc<SurfaceSpec> {
    Arc::new(SurfaceSpec::new(2, SurfaceKind::EllipticParaboloid, Domain::ball(&[0.0, 0.0], radius), margin).unwrap())
}

fn small_grid(period: f64, resolution: usize) -> Arc<FrequencyGrid> {
    Arc::new(FrequencyGrid::centered(&[0.0, 0.0], resolution, TAU / period, &[0.0, 0.0]).unwrap())
}

/// R = 64, c = 1/4: r = 8, tube width 128, window two widths.
fn fixture(seed: u64) -> (WaveState, CubeRegion) {
    let s = surface(0.2, 0.1);
    let g = small_grid(256.0, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<([f64; 2], [f64; 2], f64)> = (0..3)
        .map(|_| {
            (
                [rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)],
                [rng.random_range(-40.0..40.0), rng.random_range(-40.0..40.0)],
                rng.random_range(0.5..1.5),
            )
        })
        .collect();
    let w = init_wave(
        s,
        |x| {
            bumps
                .iter()
                .map(|(c0, y, a)| {
                    let r = (x[0] - c0[0]).hypot(x[1] - c0[1]);
                    Complex64::from_polar(a * bump(r / 0.09, 1.0), -(x[0] * y[0] + x[1] * y[1]))
                })
                .sum()
        },
        g,
    )
    .unwrap();
    (w, CubeRegion::new(vec![0.0, 0.0, 0.0], 64.0).unwrap())
}

#[test]
fn bump_profile_is_normalized_and_band_limited() {
    let p = BumpProfile::new(2, 6.0);
    let (lo, hi, m) = (-40.0, 40.0, 8001);
    let h = (hi - lo) / (m - 1) as f64;
    let integral: f64 = (0..m).map(|i| p.eta_1d(lo + i as f64 * h) * h).sum();
    assert!((integral - 1.0).abs() < 1e-6, "{integral}");
    for i in 0..200 {
        let y = -10.0 + 0.1 * i as f64;
        assert!(p.eta(&[y, 0.3 * y]) >= 0.0);
    }
    assert!((p.eta_hat(&[0.0, 0.0]) - 1.0).abs() < 1e-12);
    for k in [[0.8, 0.7], [1.0, 0.0], [0.0, -0.72], [0.72, 0.72]] {
        assert_eq!(p.eta_hat(&k), 0.0);
    }
    for k in [0.1, 0.3, 0.55] {
        let direct: f64 = (0..m).map(|i| {
            let y = lo + i as f64 * h;
            p.eta_1d(y) * (TAU * k * y).cos() * h
        }).sum();
        assert!((direct - p.eta_hat_1d(k)).abs() < 1e-8, "k={k}");
    }
}

#[test]
fn spatial_cutoffs_sum_to_one() {
    let p = BumpProfile::new(2, 6.0);
    let width = 37.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let x = rng.random_range(-100.0..100.0);
        let s: f64 = (-60..=60).map(|j| p.eta_1d((x - j as f64 * width) / width)).sum();
        assert!((s - 1.0).abs() < 1e-6);
    }
}

#[test]
fn dyadic_radius_selection() {
    assert_eq!(packet_radius(256.0), 16.0);
    assert_eq!(packet_radius(128.0), 16.0);
    assert_eq!(packet_radius(64.0), 8.0);
    for scale in [100.0, 300.0, 1000.0, 5000.0] {
        let r = packet_radius(scale);
        assert!(r >= scale.sqrt() && r < 2.0 * scale.sqrt());
        let j = (scale / r).log2();
        assert!((j - j.round()).abs() < 1e-12);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let (f, q) = fixture(1);
    assert!(matches!(decompose(&f, &q, 0.3, 10, 3), Err(Error::Parameter { .. })));
    assert!(matches!(decompose(&f, &q, 0.1, 10, 3), Err(Error::Parameter { .. })));
    assert!(matches!(decompose(&f, &q, 0.2, 10, 3), Err(Error::Parameter { .. })));
    let coarse = init_wave(surface(0.2, 0.1), |_| c(0.0), small_grid(16.0, 8)).unwrap();
    let q = CubeRegion::new(vec![0.0, 0.0, 0.0], 1.0e6).unwrap();
    let err = decompose(&coarse, &q, 0.25, 10, 3).unwrap_err();
    assert!(matches!(err, Error::Parameter { .. } | Error::Resolution { .. }));
}

#[test]
fn lattices_and_cutoffs_follow_definitions() {
    let (f, q) = fixture(2);
    let d = decompose(&f, &q, 0.25, 10, 3).unwrap();
    assert_eq!(d.params.r, 8.0);
    assert_eq!(d.params.width, 128.0);
    assert_eq!(d.params.period_cells, 2);
    let dom = f.surface().enlarged_domain();
    for t in &d.tubes {
        for a in 0..2 {
            assert_eq!(t.x[a] / 128.0, (t.x[a] / 128.0).round());
            assert_eq!(t.xi[a] * 8.0, (t.xi[a] * 8.0).round());
            assert_eq!(t.velocity[a], -2.0 * t.xi[a]);
        }
        assert!(dom.contains(&t.xi));
        let (x, s) = ([10.0, -20.0], 5.0);
        let dist = ((x[0] - t.x[0] - t.velocity[0] * s).powi(2) + (x[1] - t.x[1] - t.velocity[1] * s).powi(2)).sqrt();
        assert!((t.cutoff(&x, s) - (1.0 + dist / 128.0).powi(-10)).abs() < 1e-15);
    }
}

#[test]
fn voronoi_weights_partition_frequencies() {
    let (f, q) = fixture(3);
    let d = decompose(&f, &q, 0.25, 10, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let xi = [rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)];
        let total: f64 = (0..d.lattice.len()).map(|k| d.cell_weight(k, &xi)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
    let d1 = decompose(&f, &q, 0.25, 10, 1).unwrap();
    let tie = [0.0625, 0.0];
    let owner: Vec<usize> = (0..d1.lattice.len()).filter(|&k| d1.cell_weight(k, &tie) > 0.0).collect();
    assert_eq!(owner.len(), 1);
    assert_eq!(d1.lattice[owner[0]], vec![0.0, 0.0]);
}

fn single_cell_wave(period: f64, resolution: usize, radius: f64) -> WaveState {
    init_wave(surface(0.2, 0.1), |x| c(bump(x[0].hypot(x[1]) / radius, 1.0)), small_grid(period, resolution)).unwrap()
}

#[test]
fn single_cell_wave_gives_one_family() {
    let f = single_cell_wave(2048.0, 256, 0.012);
    let q = CubeRegion::new(vec![0.0, 0.0, 0.0], 64.0).unwrap();
    let d = decompose(&f, &q, 0.25, 10, 3).unwrap();
    assert_eq!(d.pieces.len(), 1);
    assert!(d.tubes.iter().all(|t| t.xi == vec![0.0, 0.0]));
    assert!(reconstruction_residual(&d) <= 1e-8);
}

#[test]
fn decomposition_is_linear() {
    let (f, q) = fixture(4);
    let g = f.evolve(3.0).at_time(0.0).scaled(Complex64::new(0.3, -1.1));
    let gg = WaveState::from_parts(
        f.surface().clone(),
        f.grid().clone(),
        f.offset().to_vec(),
        f.shape().to_vec(),
        f.amplitudes().iter().enumerate().map(|(i, a)| a * Complex64::from_polar(1.0, i as f64 * 0.37)).collect(),
        0.0,
    )
    .unwrap();
    let (alpha, beta) = (Complex64::new(1.5, 0.5), Complex64::new(-0.75, 2.0));
    let mix = WaveState::combination(&[(alpha, &g), (beta, &gg)]).unwrap();
    let dm = decompose(&mix, &q, 0.25, 10, 3).unwrap();
    let dg = decompose(&g, &q, 0.25, 10, 3).unwrap();
    let dgg = decompose(&gg, &q, 0.25, 10, 3).unwrap();
    assert_eq!(dm.tubes, dg.tubes);
    assert_eq!(dm.tubes, dgg.tubes);
    for i in 0..dm.tubes.len() {
        let expect = WaveState::combination(&[(alpha, &dg.packet(i)), (beta, &dgg.packet(i))]).unwrap();
        let scale = expect.mass().max(1e-30);
        assert!(dm.packet(i).distance_sqr(&expect) <= 1e-20 * scale.max(dm.source.mass()));
    }
}

#[test]
fn reconstruction_and_refinement() {
    let (f, q) = fixture(5);
    let zero = f.scaled(c(0.0));
    assert_eq!(reconstruction_residual(&decompose(&zero, &q, 0.25, 10, 3).unwrap()), 0.0);
    let mut last = f64::INFINITY;
    for n_omega in [1, 3, 6] {
        let res = reconstruction_residual(&decompose(&f, &q, 0.25, 10, n_omega).unwrap());
        assert!(res <= 1e-3);
        assert!(res <= last + 1e-12);
        last = res;
    }
}

#[test]
fn packets_stay_spectrally_local() {
    let (f, q) = fixture(6);
    let d = decompose(&f, &q, 0.25, 10, 3).unwrap();
    assert!(margin_shift_constant(&d) <= 8.0);
    for t in 0..d.tubes.len() {
        assert!(d.packet(t).margin() >= f.margin() - 8.0 / 8.0);
    }
    let (r, c) = (d.params.r, d.params.c);
    let slack = 2.0 * TAU * c * c / r + 2.0 * 2f64.sqrt() * f.grid().spacing;
    assert!(max_packet_diameter(&d) <= (2.0 + 2.0 * c * c) * 2f64.sqrt() / r + slack);
}

#[test]
fn mass_redistribution_is_bounded_by_fit() {
    let (f, q) = fixture(7);
    let d = decompose(&f, &q, 0.25, 10, 3).unwrap();
    let cfit = fit_constant(&d).unwrap();
    assert!(cfit.is_finite() && cfit >= 0.0);
    let nt = d.tubes.len();
    let nq = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let mut m = vec![vec![0.0; nt]; nq];
        for t in 0..nt {
            m[rng.random_range(0..nq)][t] = 1.0;
        }
        assert!(mass_redistribution_check(&d, &m).unwrap() <= d.params.c * cfit + 1e-12);
    }
    let uniform = vec![vec![1.0 / nq as f64; nt]; nq];
    assert!(mass_redistribution_check(&d, &uniform).unwrap() <= d.params.c * cfit + 1e-12);
    let mut bad = uniform.clone();
    bad[0][0] += 0.1;
    assert!(matches!(mass_redistribution_check(&d, &bad), Err(Error::Input { .. })));
}

#[test]
fn single_packet_redistribution_and_qest() {
    let f = single_cell_wave(128.0, 32, 0.02);
    let q = CubeRegion::new(vec![0.0, 0.0, 0.0], 64.0).unwrap();
    let d = decompose(&f, &q, 0.25, 10, 3).unwrap();
    assert_eq!(d.tubes.len(), 1);
    let m = vec![vec![0.25]; 4];
    assert!(mass_redistribution_check(&d, &m).unwrap() <= 1e-10);
    assert!(mass_redistribution_check(&d, &[vec![1.0]]).unwrap().abs() <= 1e-10);
    let rep = qest_check(&d, &q, 2);
    let packet = d.packet(0);
    assert!(rep.ratio <= packet.mass() / (d.params.r * f.mass()) * 1.0 + 1e-12);
    assert!(rep.ratio > 0.0);
}

#[test]
fn qest_terms_match_direct_evaluation() {
    let (f, q) = fixture(8);
    let d = decompose(&f, &q, 0.25, 10, 3).unwrap();
    let zero = decompose(&f.scaled(c(0.0)), &q, 0.25, 10, 3).unwrap();
    assert_eq!(qest_check(&zero, &q, 2).ratio, 0.0);
    let rep = qest_check(&d, &q, 2);
    let i = rep.terms.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    let tube = &d.tubes[i];
    let w = d.packet(i);
    let k = 8usize;
    let mut best: f64 = 0.0;
    for qt in 0..k {
        for qx in 0..k {
            for qy in 0..k {
                let lo = [-32.0 + 8.0 * qx as f64, -32.0 + 8.0 * qy as f64, -32.0 + 8.0 * qt as f64];
                let mut e = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        for s in 0..2 {
                            let x = [lo[0] + 2.0 + 4.0 * a as f64, lo[1] + 2.0 + 4.0 * b as f64];
                            let t = lo[2] + 2.0 + 4.0 * s as f64;
                            let v = w.eval_tensor(&[vec![x[0]], vec![x[1]]], t)[0];
                            e += v.norm_sqr() * 64.0;
                        }
                    }
                }
                let weight = 1.0 / tube.cutoff(&[lo[0] + 4.0, lo[1] + 4.0], lo[2] + 4.0);
                best = best.max(weight * e);
            }
        }
    }
    assert!((best - rep.terms[i]).abs() <= 1e-9 * best);
}

#[test]
fn commutator_constant_is_finite_and_grows_slowly() {
    let (f, q) = fixture(9);
    let d = decompose(&f, &q, 0.25, 10, 3).unwrap();
    let ks: Vec<f64> = [0.0, 16.0, 32.0].iter().map(|&t| commutator_constant(&d, t)).collect();
    assert!(ks.iter().all(|k| k.is_finite() && *k > 0.0 && *k < 10.0));
    for w in ks.windows(2) {
        assert!(w[1] >= w[0] * (1.0 - 1e-3));
    }
}

#[test]
fn far_tube_edge_cases() {
    let (f, q) = fixture(10);
    let zero = decompose(&f.scaled(c(0.0)), &q, 0.25, 10, 3).unwrap();
    assert_eq!(far_tube_decay(&zero, &q, &FarTubeOptions::default()).unwrap().worst_ratio, 0.0);
    let d = decompose(&f, &q, 0.25, 10, 3).unwrap();
    assert!(matches!(far_tube_decay(&d, &q, &FarTubeOptions::default()), Err(Error::Inconclusive { .. })));
}

#[test]
fn inventory_lists_every_tube() {
    let (f, q) = fixture(11);
    let d = decompose(&f, &q, 0.25, 10, 3).unwrap();
    let mut buf = Vec::new();
    write_inventory(&mut buf, &d).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("x0,x1,xi0,xi1,mass,spectral_diameter"));
    assert_eq!(text.lines().count(), d.tubes.len() + 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn packets_sum_to_source(seed in 0u64..10_000) {
        let (f, q) = fixture(seed);
        let d = decompose(&f, &q, 0.25, 10, 2).unwrap();
        prop_assert!(reconstruction_residual(&d) <= 1e-10);
        let masses: f64 = d.packets().iter().map(|w| w.mass()).sum();
        prop_assert!(masses > 0.0);
    }
}

#[test]
fn qest_ratio_stable_under_doubling() {
    let s = surface(0.2, 0.1);
    let g = small_grid(1024.0, 128);
    let f = init_wave(
        s,
        |x| {
            let r = (x[0] - 0.05).hypot(x[1] + 0.03);
            Complex64::from_polar(bump(r / 0.09, 1.0), -(20.0 * x[0] - 40.0 * x[1]))
        },
        g,
    )
    .unwrap();
    let ratios: Vec<f64> = [128.0, 256.0]
        .iter()
        .map(|&scale| {
            let q = CubeRegion::new(vec![0.0, 0.0, 0.0], scale).unwrap();
            qest_check(&decompose(&f, &q, 0.25, 10, 3).unwrap(), &q, 2).ratio
        })
        .collect();
    assert!((ratios[1] / ratios[0] - 1.0).abs() <= 0.2, "{ratios:?}");
}
