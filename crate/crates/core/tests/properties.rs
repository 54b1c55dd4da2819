use nalgebra::DMatrix;
use proptest::prelude::*;
use rustfft::num_complex::Complex64;

use hypertrack::colorize::{
    dark_calibrate, resample_cmfs, spectral_correct, xyz_stage, CmfData, CorrectionMatrix,
};
use hypertrack::cube::{linear_wavelengths, BoundingBox, HyperspectralCube, HyperspectralSequence};
use hypertrack::eval::{evaluate_sequence, iou, run_ope, OpeSequence};
use hypertrack::io::{decode_hsb, encode_hsb};
use hypertrack::sshmg::{
    aggregate_cubes, gradients, point_features, quantize_orientations, sshmg, SshmgParams,
};
use hypertrack::synth::{synth_scene, Preset};
use hypertrack::tracker::fft::Fft2;
use hypertrack::tracker::{
    blend_weights, learn_filters, make_label, reliability_update, CropMask, FilterAdmm,
    FilterParams,
};
use hypertrack::unmixing::{
    abundance_map, clsunsal, clsunsal_lambda_max, select_endmembers, AdmmParams, EndmemberSet,
    SpectralLibrary,
};

fn quantized(w: usize, h: usize, k: usize) -> impl Strategy<Value = HyperspectralCube> {
    prop::collection::vec(0u16..=256, w * h * k).prop_map(move |v| {
        let data = v.into_iter().map(|q| q as f32 / 256.0).collect();
        HyperspectralCube::new(w, h, k, linear_wavelengths(k, 470.0, 620.0), data).unwrap()
    })
}

// SSHMG needs at least a 2x2 cell grid, so sides start at 5
fn cube_strategy(max_w: usize, max_h: usize, max_k: usize) -> impl Strategy<Value = HyperspectralCube> {
    (5..=max_w, 5..=max_h, 3..=max_k).prop_flat_map(|(w, h, k)| quantized(w, h, k))
}

fn cube_pair(w: usize, h: usize, k: usize) -> impl Strategy<Value = (HyperspectralCube, HyperspectralCube)> {
    (quantized(w, h, k), quantized(w, h, k))
}

fn matrix(rows: usize, cols: usize, lo: f64, hi: f64) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(lo..hi, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn boxes(n: usize) -> impl Strategy<Value = Vec<BoundingBox>> {
    prop::collection::vec((0.0..100.0f64, 0.0..100.0f64, 1.0..40.0f64, 1.0..40.0f64), n).prop_map(|v| {
        v.into_iter().map(|(x, y, w, h)| BoundingBox::from_top_left(x, y, w, h).unwrap()).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hsb_round_trip_is_bit_exact(w in 1usize..6, h in 1usize..6, k in 2usize..5, seed in any::<u64>()) {
        let mut s = seed;
        let cube = HyperspectralCube::from_fn(w, h, linear_wavelengths(k, 400.0, 700.0), |_, _, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            // finite values only; keep the exponent below the NaN/inf range
            f32::from_bits(((s >> 32) as u32) & 0x7f7f_ffff)
        }).unwrap();
        let back = decode_hsb(&encode_hsb(&cube), cube.wavelengths().to_vec()).unwrap();
        let bits = |c: &HyperspectralCube| c.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&cube));
    }

    #[test]
    fn crop_matches_naive_loop(cube in quantized(12, 10, 3), x in 0usize..12, y in 0usize..10, w in 1usize..12, h in 1usize..10) {
        prop_assume!(x + w <= cube.width() && y + h <= cube.height());
        let b = BoundingBox::from_top_left(x as f64, y as f64, w as f64, h as f64).unwrap();
        let crop = cube.crop(&b, 1.0).unwrap();
        prop_assert_eq!((crop.width(), crop.height()), (w, h));
        for k in 0..cube.bands() {
            for yy in 0..h {
                for xx in 0..w {
                    prop_assert_eq!(crop.get(xx, yy, k), cube.get(x + xx, y + yy, k));
                }
            }
        }
    }

    #[test]
    fn sshmg_blocks_are_unit_or_zero(cube in cube_strategy(16, 16, 12)) {
        let p = SshmgParams::default();
        let fm = sshmg(&cube, &p).unwrap();
        let len = p.block_len();
        for block in fm.data.chunks(len) {
            let n = block.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-9, "norm {}", n);
            prop_assert!(block.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn sshmg_is_scale_invariant(cube in cube_strategy(14, 14, 10), c in prop::sample::select(vec![0.5f32, 2.0, 10.0])) {
        let p = SshmgParams::default();
        let scaled = cube.scaled(c).unwrap();
        let diff = sshmg(&scaled, &p).unwrap().max_abs_diff(&sshmg(&cube, &p).unwrap());
        prop_assert!(diff <= 1e-9, "diff {}", diff);
    }

    #[test]
    fn histogram_mass_is_gradient_mass(cube in cube_strategy(11, 9, 9)) {
        let p = SshmgParams::default();
        let g = gradients(&cube).unwrap();
        let bins = quantize_orientations(&g, &p);
        prop_assert!(bins.theta.iter().all(|&b| b < p.n_theta));
        prop_assert!(bins.phi.iter().all(|&b| b < p.n_phi));
        let f = point_features(&g, &bins, &p);
        for (i, m) in g.magnitude.iter().enumerate() {
            let st: f64 = f.f_theta[i * p.n_theta..(i + 1) * p.n_theta].iter().sum();
            let sp: f64 = f.f_phi[i * p.n_phi..(i + 1) * p.n_phi].iter().sum();
            prop_assert_eq!(st, *m);
            prop_assert_eq!(sp, *m);
        }
        let c = aggregate_cubes(&f, &p);
        for s in 0..c.slabs {
            for j in 0..c.cells_y {
                for i in 0..c.cells_x {
                    let mut mass = 0.0;
                    for k in s * p.z..((s + 1) * p.z).min(g.bands) {
                        for y in j * p.z..((j + 1) * p.z).min(g.height) {
                            for x in i * p.z..((i + 1) * p.z).min(g.width) {
                                mass += g.magnitude[g.index(x, y, k)];
                            }
                        }
                    }
                    let hist: f64 = c.theta_hist(i, j, s).iter().sum();
                    prop_assert!((hist - mass).abs() <= 1e-12 * mass.max(1.0));
                }
            }
        }
    }

    #[test]
    fn abundances_lie_on_the_simplex(e in matrix(8, 3, 0.05, 1.0), cube in quantized(6, 5, 8)) {
        let set = EndmemberSet::new(e, vec![0, 1, 2]).unwrap();
        prop_assume!(set.inverse_condition() > 1e-3);
        let map = abundance_map(&cube, &set).unwrap();
        for px in map.data.chunks(map.r) {
            prop_assert!(px.iter().all(|&v| v >= 0.0));
            prop_assert!((px.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn clsunsal_objective_never_rises(a in matrix(8, 12, 0.0, 1.0), x in matrix(8, 4, 0.0, 1.0), frac in 0.0..1.0f64) {
        let lib = SpectralLibrary::new(a, linear_wavelengths(8, 470.0, 620.0)).unwrap();
        let lambda = frac * clsunsal_lambda_max(&x, &lib);
        let sol = clsunsal(&x, &lib, lambda, &AdmmParams::default()).unwrap();
        for p in sol.objective.windows(2) {
            prop_assert!(p[1] <= p[0] + 1e-10, "{} -> {}", p[0], p[1]);
        }
        prop_assert!(sol.s.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn endmember_selection_ignores_pixel_order(s in matrix(6, 5, 0.0, 1.0), a in matrix(8, 6, 0.05, 1.0), perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let lib = SpectralLibrary::new(a, linear_wavelengths(8, 470.0, 620.0)).unwrap();
        let permuted = s.select_columns(&perm);
        let x = select_endmembers(&s, &lib, 3);
        let y = select_endmembers(&permuted, &lib, 3);
        match (x, y) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x.source_indices, y.source_indices),
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn reliability_weights_are_normalized(groups in boxes(3), prev in boxes(3), fused in boxes(1), cell in 0.5..8.0f64, eta in 0.0..1.0f64) {
        let (w, _) = reliability_update(&groups, &fused[0], &prev, cell).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|&v| v > 0.0 && v <= 1.0));
        let blended = blend_weights(&[0.2, 0.3, 0.5], &w, eta);
        prop_assert!((blended.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn lagrangian_falls_over_primal_blocks(x in prop::collection::vec(-1.0..1.0f64, 2 * 36), lambda in 0.001..1.0f64, mu in 0.1..10.0f64) {
        let fft = Fft2::new(6, 6);
        let xh: Vec<Vec<Complex64>> = x.chunks(36).map(|p| fft.forward_real(p)).collect();
        let label = make_label((6, 6), (3, 3), 1.0).unwrap();
        let mut admm = FilterAdmm::new(&xh, &label, CropMask::centered(6, 6, 3, 2), &fft, lambda, 36.0 * mu).unwrap();
        for _ in 0..4 {
            let l0 = admm.lagrangian();
            admm.g_step();
            let l1 = admm.lagrangian();
            admm.h_step();
            let l2 = admm.lagrangian();
            let tol = 1e-9 * l0.abs().max(1.0);
            prop_assert!(l1 <= l0 + tol && l2 <= l1 + tol, "{} {} {}", l0, l1, l2);
            admm.multiplier_step();
        }
    }

    #[test]
    fn feature_scale_and_weight_cancel(x in prop::collection::vec(-1.0..1.0f64, 2 * 25), c in 0.1..10.0f64, w in 0.1..1.0f64) {
        let fft = Fft2::new(5, 5);
        let label = make_label((5, 5), (2, 2), 1.0).unwrap();
        let params = FilterParams::default();
        let spectra = |scale: f64| -> Vec<Vec<Complex64>> {
            x.chunks(25).map(|p| fft.forward_real(&p.iter().map(|v| v * scale).collect::<Vec<_>>())).collect()
        };
        let base = spectra(w);
        let scaled = spectra(c * (w / c));
        let fa = learn_filters(&base, &label, CropMask::centered(5, 5, 3, 3), &fft, &params).unwrap();
        let fb = learn_filters(&scaled, &label, CropMask::centered(5, 5, 3, 3), &fft, &params).unwrap();
        let ra = fft.inverse_real(&fa.response_hat(&spectra(1.0), 0..2, w));
        let rb = fft.inverse_real(&fb.response_hat(&spectra(c), 0..2, w / c));
        for (a, b) in ra.iter().zip(&rb) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn detection_follows_circular_shifts(x in prop::collection::vec(-1.0..1.0f64, 8 * 8), dx in 0usize..8, dy in 0usize..8) {
        let fft = Fft2::new(8, 8);
        let label = make_label((8, 8), (4, 4), 1.0).unwrap();
        let xh = vec![fft.forward_real(&x)];
        let f = learn_filters(&xh, &label, CropMask::centered(8, 8, 4, 4), &fft, &FilterParams::default()).unwrap();
        let shifted: Vec<f64> = (0..64).map(|i| {
            let (px, py) = (i % 8, i / 8);
            x[((py + 8 - dy) % 8) * 8 + (px + 8 - dx) % 8]
        }).collect();
        let r0 = fft.inverse_real(&f.response_hat(&xh, 0..1, 1.0));
        let r1 = fft.inverse_real(&f.response_hat(&[fft.forward_real(&shifted)], 0..1, 1.0));
        for i in 0..64 {
            let (px, py) = (i % 8, i / 8);
            let j = ((py + dy) % 8) * 8 + (px + dx) % 8;
            prop_assert!((r0[i] - r1[j]).abs() <= 1e-9);
        }
    }

    #[test]
    fn curves_are_monotone(gt in boxes(12), traj in boxes(12)) {
        let rep = evaluate_sequence(&traj, &gt, &[]).unwrap();
        prop_assert!(rep.curves.is_monotone());
        let mean = rep.curves.success_curve.iter().sum::<f64>() / rep.curves.success_curve.len() as f64;
        prop_assert_eq!(rep.curves.auc, mean);
        prop_assert!((0.0..=1.0).contains(&rep.curves.auc));
    }

    #[test]
    fn iou_is_symmetric(b in boxes(2)) {
        prop_assert_eq!(iou(&b[0], &b[1]), iou(&b[1], &b[0]));
        prop_assert!((iou(&b[0], &b[0]) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn false_color_is_linear_before_gamma((x, y) in cube_pair(5, 4, 6)) {
        let cmfs = resample_cmfs(&CmfData::bundled(), x.wavelengths()).unwrap();
        let (a, b) = (0.5f32, 0.25f32);
        let mix = HyperspectralCube::new(x.width(), x.height(), x.bands(), x.wavelengths().to_vec(),
            x.data().iter().zip(y.data()).map(|(u, v)| a * u + b * v).collect()).unwrap();
        let (fx, fy, fm) = (xyz_stage(&x, &cmfs).unwrap(), xyz_stage(&y, &cmfs).unwrap(), xyz_stage(&mix, &cmfs).unwrap());
        for p in 0..fm.pixels.len() {
            for c in 0..3 {
                let e = a as f64 * fx.pixels[p][c] + b as f64 * fy.pixels[p][c];
                prop_assert!((fm.pixels[p][c] - e).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn calibration_stays_in_range((raw, dark) in cube_pair(5, 4, 4)) {
        let out = dark_calibrate(&raw, &dark).unwrap();
        prop_assert!(out.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert_eq!(spectral_correct(&raw, &CorrectionMatrix::identity(raw.bands())).unwrap(), raw);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn synth_is_deterministic(seed in any::<u64>()) {
        let cfg = Preset::InPlaneRotation.config();
        prop_assert_eq!(synth_scene(&cfg, seed).unwrap(), synth_scene(&cfg, seed).unwrap());
    }

    #[test]
    fn ope_report_ignores_sequence_order(perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle(), gt in boxes(5)) {
        let frame = HyperspectralCube::from_fn(4, 4, linear_wavelengths(3, 470.0, 620.0), |_, _, _| 0.0).unwrap();
        let seq = HyperspectralSequence::new(vec![frame; 5], 10.0).unwrap();
        let dataset: Vec<OpeSequence> = (0..4).map(|i| OpeSequence {
            name: format!("seq{i}"),
            frames: seq.clone(),
            groundtruth: gt.iter().map(|b| b.with_center(b.cx + i as f64, b.cy)).collect(),
            attributes: if i % 2 == 0 { vec!["BC".into()] } else { vec![] },
        }).collect();
        let tracker = |_: &HyperspectralSequence, init: BoundingBox| Ok(vec![init; 5]);
        let a = run_ope(&dataset, tracker);
        let shuffled: Vec<OpeSequence> = perm.iter().map(|&i| dataset[i].clone()).collect();
        let b = run_ope(&shuffled, tracker);
        prop_assert_eq!(a, b);
    }
}
