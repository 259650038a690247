use besov_ch::initial_data::block_lower_bound_report;
use besov_ch::{
    build_u0, f_profile, g_profile, BesovParams, CamassaHolm, DyadicPartition, Exponent,
    InitialDataSpec, LacunaryDatum, Sign, SpectralField, TorusGrid, DEFAULT_PERIOD, TWO_THIRDS,
};

fn desk_grid() -> TorusGrid {
    TorusGrid::with_points(DEFAULT_PERIOD, vec![4096, 64]).unwrap()
}

/// Largest energy fraction outside block `target`, relative to `||f||`.
fn leakage(part: &DyadicPartition, f: &SpectralField, target: i32) -> (f64, f64) {
    let inside = part.block(f, target).unwrap().sub(f).unwrap().l2_norm() / f.l2_norm();
    let outside = part
        .block_indices()
        .filter(|&j| j != target)
        .map(|j| part.block(f, j).unwrap().l2_norm() / f.l2_norm())
        .fold(0.0, f64::max);
    (inside, outside)
}

#[test]
fn profiles_localize_in_their_block() {
    let grid = desk_grid();
    let part = DyadicPartition::standard(&grid);
    for n in 1..=3 {
        let (inside, outside) = leakage(&part, &f_profile(2, n, &grid).unwrap(), 2 * n as i32);
        assert!(
            inside < 1e-10 && outside < 1e-10,
            "f_{n}: {inside:e} {outside:e}"
        );
    }
    for (m, n, sign) in [
        (0, 2, Sign::Plus),
        (0, 3, Sign::Plus),
        (0, 3, Sign::Minus),
        (1, 3, Sign::Plus),
        (1, 3, Sign::Minus),
    ] {
        let g = g_profile(2, m, n, sign, &grid).unwrap();
        let (inside, outside) = leakage(&part, &g, 2 * n as i32);
        assert!(
            inside < 1e-10 && outside < 1e-10,
            "g_({m},{n},{sign:?}): {inside:e} {outside:e}"
        );
    }
}

#[test]
fn low_minus_profile_leaks_through_its_edge_mode() {
    // Carrier 255 puts mode 250 at 250/192 < 4/3, where psi falls just short of 1.
    let grid = desk_grid();
    let part = DyadicPartition::standard(&grid);
    let g = g_profile(2, 0, 2, Sign::Minus, &grid).unwrap();
    let (inside, outside) = leakage(&part, &g, 4);
    assert!(inside > 1e-10 && inside < 1e-8, "{inside:e}");
    assert!(outside > 1e-10 && outside < 1e-8, "{outside:e}");
}

#[test]
fn adjacent_level_cross_profiles_leave_their_block() {
    // With k = 2 the carrier 17 (2^{kn} +- 2^{k(n-1)}) sits at 5/4 or 3/4 of 17 2^{kn}.
    let grid = desk_grid();
    let part = DyadicPartition::standard(&grid);
    for n in 1..=3 {
        let g = g_profile(2, n - 1, n, Sign::Plus, &grid).unwrap();
        let (inside, _) = leakage(&part, &g, 2 * n as i32);
        assert!(
            inside > 1e-3,
            "g_({},{n}) unexpectedly localized: {inside:e}",
            n - 1
        );
    }
}

#[test]
fn lowest_profile_spans_the_low_blocks() {
    let grid = desk_grid();
    let part = DyadicPartition::standard(&grid);
    let f0 = f_profile(2, 0, &grid).unwrap();
    let mut low = SpectralField::zeros(&grid, 2);
    for j in -1..=1 {
        low.axpy(1.0, &part.block(&f0, j).unwrap()).unwrap();
    }
    assert!(low.sub(&f0).unwrap().l2_norm() < 1e-12 * f0.l2_norm());
    let fraction = part.block(&f0, 0).unwrap().l2_norm() / f0.l2_norm();
    assert!(fraction > 0.9 && fraction < 1.0, "{fraction}");
}

#[test]
fn u0_blocks_are_the_weighted_profiles() {
    let grid = desk_grid();
    let part = DyadicPartition::standard(&grid);
    let spec = InitialDataSpec::default();
    let u0 = build_u0(&spec, &grid, TWO_THIRDS).unwrap();
    for n in 1..=3 {
        let expected = f_profile(2, n, &grid).unwrap().scaled(spec.weight(n));
        let block = part.block(&u0, 2 * n as i32).unwrap();
        assert!(block.sub(&expected).unwrap().l2_norm() < 1e-10 * expected.l2_norm());
    }
    let scale = |j: i32| 2f64.powf(j as f64 * spec.sigma);
    for j in part
        .block_indices()
        .filter(|j| ![-1, 0, 1, 2, 4, 6].contains(j))
    {
        assert!(
            part.block(&u0, j).unwrap().l2_norm() * scale(j) < 1e-10,
            "block {j}"
        );
    }
    let normalized: Vec<f64> = (0..=3)
        .map(|n| scale(2 * n) * part.block_lp_norm(&u0, 2 * n, Exponent::TWO).unwrap())
        .collect();
    let (lo, hi) = normalized
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 1.1, "{normalized:?}");
    let norm = part
        .besov_norm(&u0, BesovParams::sup(spec.sigma, Exponent::TWO))
        .unwrap();
    let profile_max = (0..=3)
        .map(|n| f_profile(2, n, &grid).unwrap().l2_norm())
        .fold(0.0, f64::max);
    assert!(
        norm <= profile_max * (1.0 + 1e-12),
        "{norm} > {profile_max}"
    );
}

#[test]
fn advection_of_u0_is_half_gradient_of_square() {
    let grid = TorusGrid::with_points(DEFAULT_PERIOD, vec![2048, 32]).unwrap();
    let spec = InitialDataSpec {
        levels: 2,
        ..InitialDataSpec::default()
    };
    let u0 = build_u0(&spec, &grid, TWO_THIRDS).unwrap();
    let ops = CamassaHolm::default();
    let adv = ops.advection(&u0).unwrap();
    let square = u0.dot(&u0, TWO_THIRDS).unwrap();
    let expected = SpectralField::from_coefficients(
        &grid,
        vec![
            square.derivative(0, 0).iter().map(|z| z * 0.5).collect(),
            vec![Default::default(); grid.len()],
        ],
    )
    .unwrap();
    let err = adv.sub(&expected).unwrap().l2_norm() / expected.l2_norm();
    assert!(err < 1e-12, "relative error {err}");
    // |u_0|^2 = (u_0^1)^2 pointwise.
    let samples = u0.to_physical().unwrap();
    assert!(samples[1].iter().all(|&v| v == 0.0));
}

#[test]
fn square_block_lower_bound() {
    let grid = desk_grid();
    let part = DyadicPartition::standard(&grid);
    let spec = InitialDataSpec::default();
    let rows = block_lower_bound_report(&spec.datum(), &part, Exponent::TWO, TWO_THIRDS).unwrap();
    for r in &rows {
        println!(
            "n = {}: block {:.6e}, I1 {:.6e}, I2 {:.6e}, I2/I1 {:.3e}",
            r.n,
            r.block,
            r.i1,
            r.i2,
            r.ratio()
        );
    }
    let blocks: Vec<f64> = rows.iter().map(|r| r.block).collect();
    assert!(blocks.iter().all(|&b| b > 0.0));
    let (lo, hi) = blocks
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 2.0);
    let bound = 2f64.powf(-2.0 * spec.sigma + 1.0);
    for r in rows.iter().filter(|r| r.n >= 2) {
        assert!(r.ratio() < bound, "n = {}: {} >= {bound}", r.n, r.ratio());
    }
}

#[test]
fn single_block_square_has_only_diagonal_terms() {
    let grid = TorusGrid::with_points(DEFAULT_PERIOD, vec![512, 32]).unwrap();
    let part = DyadicPartition::standard(&grid);
    let datum = LacunaryDatum::single_block(2, 1, 4.5);
    let rows = block_lower_bound_report(&datum, &part, Exponent::TWO, TWO_THIRDS).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].i1, rows[0].i2), (0.0, 0.0));
    let u0 = datum.build(&grid).unwrap();
    let square = u0.dot(&u0, TWO_THIRDS).unwrap();
    let mut diagonal = datum.square_diagonal(&grid).unwrap();
    diagonal
        .axpy(1.0, &datum.square_doubled(&grid).unwrap())
        .unwrap();
    let diagonal = diagonal.dealiased(TWO_THIRDS);
    assert!(square.sub(&diagonal).unwrap().l2_norm() <= 1e-12 * square.l2_norm());
    let a = part.block(&square, 2).unwrap();
    let b = part.block(&diagonal, 2).unwrap();
    assert!(a.sub(&b).unwrap().l2_norm() <= 1e-12 * square.l2_norm());
}
