use std::f64::consts::PI;

use besov_ch::{
    build_u0, helmholtz, helmholtz_inverse, CamassaHolm, Complex64, DyadicPartition, Exponent,
    InitialDataSpec, SpectralField, TorusGrid, DEFAULT_PERIOD, TWO_THIRDS,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_field(dim: usize, seed: u64) -> SpectralField {
    let (points, band) = match dim {
        1 => (64, 10),
        2 => (32, 5),
        _ => (16, 2),
    };
    let grid = TorusGrid::new(dim, 2.0 * PI, points).unwrap();
    SpectralField::random_band_limited(&grid, dim, band, 0.1, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn relative(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

#[test]
fn formulations_agree_on_random_fields() {
    let ops = CamassaHolm::default();
    for seed in 0..20u64 {
        let u = random_field(1 + (seed % 3) as usize, seed);
        let via_m = helmholtz_inverse(&ops.m_form_rhs(&helmholtz(&u), &u).unwrap());
        let direct = ops.rhs(&u).unwrap();
        let err = relative(&via_m, &direct);
        assert!(err < 1e-8, "seed {seed}: {err:e}");
    }
}

#[test]
fn helmholtz_inverse_of_lattice_cosine() {
    let grid = TorusGrid::new(1, DEFAULT_PERIOD, 64).unwrap();
    let cos: Vec<f64> = (0..64)
        .map(|q| (17.0 / 12.0 * q as f64 * grid.spacing(0)).cos())
        .collect();
    let f = SpectralField::to_spectral(&grid, &[cos]).unwrap();
    let expected = f.scaled(1.0 / (1.0 + (17.0f64 / 12.0).powi(2)));
    assert!(
        helmholtz_inverse(&f)
            .sub(&expected)
            .unwrap()
            .max_abs_coefficient()
            < 1e-15
    );
    assert!(
        helmholtz(&helmholtz_inverse(&f))
            .sub(&f)
            .unwrap()
            .max_abs_coefficient()
            < 1e-12
    );
}

/// `u = (a cos(x1 + 2 x2), b sin(2 x1 - x2) + c cos x2)` with its Jacobian `G[i][j] = d_j u_i`.
fn harmonic(x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, c) = (0.3, 0.2, 0.1);
    let p = x[0] + 2.0 * x[1];
    let q = 2.0 * x[0] - x[1];
    let u = [a * p.cos(), b * q.sin() + c * x[1].cos()];
    let g = [
        [-a * p.sin(), -2.0 * a * p.sin()],
        [2.0 * b * q.cos(), -b * q.cos() - c * x[1].sin()],
    ];
    (u, g)
}

/// Direct DFT coefficient at mode `m` of samples on an `n x n` grid of `[0, 2 pi)^2`.
fn dft(samples: &[f64], n: usize, m: [i64; 2]) -> Complex64 {
    let h = 2.0 * PI / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for q0 in 0..n {
        for q1 in 0..n {
            let phase = -(m[0] as f64 * q0 as f64 + m[1] as f64 * q1 as f64) * h;
            acc += samples[q0 * n + q1] * Complex64::from_polar(1.0, phase);
        }
    }
    acc / (n * n) as f64
}

fn oracle(n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let h = 2.0 * PI / n as f64;
    // Q matrix entries A[i][j] and R vector entries at each grid point.
    let mut a = vec![vec![0.0; n * n]; 4];
    let mut r = vec![vec![0.0; n * n]; 2];
    for q0 in 0..n {
        for q1 in 0..n {
            let (u, g) = harmonic([q0 as f64 * h, q1 as f64 * h]);
            let div = g[0][0] + g[1][1];
            let frob: f64 = g.iter().flatten().map(|v| v * v).sum();
            for i in 0..2 {
                for j in 0..2 {
                    let mut v = 0.0;
                    for l in 0..2 {
                        v += g[i][l] * g[l][j] + g[i][l] * g[j][l] - g[l][i] * g[l][j];
                    }
                    v -= g[i][j] * div;
                    if i == j {
                        v += 0.5 * frob;
                    }
                    a[2 * i + j][q0 * n + q1] = v;
                }
                r[i][q0 * n + q1] = u[i] * div + (0..2).map(|l| u[l] * g[l][i]).sum::<f64>();
            }
        }
    }
    (a, r)
}

#[test]
fn q_and_r_match_a_double_resolution_oracle() {
    let coarse = 16;
    let fine = 2 * coarse;
    let grid = TorusGrid::new(2, 2.0 * PI, coarse).unwrap();
    let h = grid.spacing(0);
    let mut samples = vec![vec![0.0; grid.len()]; 2];
    for q0 in 0..coarse {
        for q1 in 0..coarse {
            let (u, _) = harmonic([q0 as f64 * h, q1 as f64 * h]);
            samples[0][q0 * coarse + q1] = u[0];
            samples[1][q0 * coarse + q1] = u[1];
        }
    }
    let u = SpectralField::to_spectral(&grid, &samples).unwrap();
    let ops = CamassaHolm::default();
    let q = ops.q_term(&u).unwrap();
    let r = ops.r_term(&u).unwrap();

    let (a, rv) = oracle(fine);
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for m0 in -6i64..=6 {
        for m1 in -6i64..=6 {
            let symbol = 1.0 + (m0 * m0 + m1 * m1) as f64;
            let i_m = [
                Complex64::new(0.0, m0 as f64),
                Complex64::new(0.0, m1 as f64),
            ];
            for i in 0..2 {
                let div: Complex64 = (0..2)
                    .map(|j| i_m[j] * dft(&a[2 * i + j], fine, [m0, m1]))
                    .sum();
                let q_expected = -div / symbol;
                let r_expected = -dft(&rv[i], fine, [m0, m1]) / symbol;
                let got_q = q.coefficient(i, &[m0, m1]);
                let got_r = r.coefficient(i, &[m0, m1]);
                worst = worst
                    .max((got_q - q_expected).norm())
                    .max((got_r - r_expected).norm());
                scale = scale.max(q_expected.norm()).max(r_expected.norm());
            }
        }
    }
    assert!(scale > 1e-3);
    assert!(
        worst < 1e-8 * scale,
        "worst coefficient error {worst:e} against scale {scale:e}"
    );
}

#[test]
fn r_gains_two_derivatives() {
    let grid = TorusGrid::new(2, 2.0 * PI, 128).unwrap();
    let part = DyadicPartition::standard(&grid);
    let u =
        SpectralField::random_band_limited(&grid, 2, 20, 0.05, &mut ChaCha8Rng::seed_from_u64(9));
    let r = CamassaHolm::default().r_term(&u).unwrap();
    let before = helmholtz(&r);
    for j in 1..=4 {
        let gain = part.block_lp_norm(&r, j, Exponent::TWO).unwrap()
            / part.block_lp_norm(&before, j, Exponent::TWO).unwrap();
        let lam = 2f64.powi(j);
        let (lo, hi) = (
            1.0 / (1.0 + (8.0 / 3.0 * lam).powi(2)),
            1.0 / (1.0 + (0.75 * lam).powi(2)),
        );
        println!(
            "block {j}: smoothing factor {gain:.4e} (2^-2j = {:.4e})",
            lam.powi(-2)
        );
        assert!(gain >= lo && gain <= hi, "block {j}: {gain}");
    }
}

#[test]
fn advection_block_dominates_for_the_lacunary_datum() {
    let grid = TorusGrid::with_points(DEFAULT_PERIOD, vec![4096, 64]).unwrap();
    let part = DyadicPartition::standard(&grid);
    let spec = InitialDataSpec::default();
    let u0 = build_u0(&spec, &grid, TWO_THIRDS).unwrap();
    let parts = CamassaHolm::default().rhs_parts(&u0).unwrap();
    let mut growth = Vec::new();
    for n in 1..=3u32 {
        let j = (spec.k * n) as i32;
        let scale = 2f64.powf(j as f64 * spec.sigma);
        let block = |f: &SpectralField| scale * part.block_lp_norm(f, j, Exponent::TWO).unwrap();
        let (adv, q, r) = (block(&parts.advection), block(&parts.q), block(&parts.r));
        println!(
            "n = {n}: advection {adv:.4e}, Q {q:.4e}, R {r:.4e}, advection / 2^kn {:.4e}",
            adv / 2f64.powi(j)
        );
        assert!(adv > 2f64.powi(j) * (q + r) / 4.0, "n = {n}");
        growth.push(adv / 2f64.powi(j));
    }
    assert!(
        growth.windows(2).all(|w| (w[1] / w[0] - 1.0).abs() < 0.5),
        "{growth:?}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn quadratic_forms_are_bilinear(seed in any::<u64>(), a in -2.0f64..2.0) {
        let ops = CamassaHolm::default();
        let u = random_field(2, seed);
        let v = random_field(2, seed.wrapping_add(1));
        let w = random_field(2, seed.wrapping_add(2));
        let terms: [&dyn Fn(&SpectralField) -> SpectralField; 3] = [
            &|f| ops.advection(f).unwrap(),
            &|f| ops.q_term(f).unwrap(),
            &|f| ops.r_term(f).unwrap(),
        ];
        for term in terms {
            let polar = |x: &SpectralField, y: &SpectralField| {
                let mut out = term(&x.add(y).unwrap());
                out.axpy(-1.0, &term(x)).unwrap();
                out.axpy(-1.0, &term(y)).unwrap();
                out
            };
            let base = polar(&u, &v);
            let scaled = polar(&u.scaled(a), &v);
            prop_assert!(scaled.sub(&base.scaled(a)).unwrap().max_abs_coefficient() <= 1e-12 * base.max_abs_coefficient().max(1e-300));
            let split = polar(&u.add(&w).unwrap(), &v);
            let sum = base.add(&polar(&w, &v)).unwrap();
            prop_assert!(split.sub(&sum).unwrap().max_abs_coefficient() <= 1e-12 * sum.max_abs_coefficient().max(1e-300));
        }
    }

    #[test]
    fn outputs_stay_real_and_in_band(seed in any::<u64>()) {
        let ops = CamassaHolm::default();
        let u = random_field(2, seed);
        let out = ops.rhs(&u).unwrap();
        prop_assert!(out.hermitian_defect() < 1e-12);
        prop_assert!(out.is_band_limited(TWO_THIRDS));
    }
}
