//! Randomized invariants. Unit tests pin exact values on fixtures; these
//! properties assert the structural statements for arbitrary fields, symbols
//! and parameters: unitarity, multiplier algebra, conservation structure,
//! and the symmetry/positivity guarantees the library trades on.

use num_complex::Complex64;
use proptest::prelude::*;

use hartree_lab::dynamics::{hartree_potential, step_strang, ModelParams};
use hartree_lab::functionals::{energy, mass, modified_energy, sobolev_norm};
use hartree_lab::symbols::SymbolSpec;
use hartree_lab::{apply_symbol, i_operator, m_eval, make_grid, Field, IParams, Representation};

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn field_1d(n: usize, repr: Representation) -> impl Strategy<Value = Field> {
    complex_vec(n).prop_map(move |vals| {
        let g = make_grid(1, n, 8.0).unwrap();
        Field::from_values(&g, repr, vals).unwrap()
    })
}

fn field_2d(n: usize) -> impl Strategy<Value = Field> {
    complex_vec(n * n).prop_map(move |vals| {
        let g = make_grid(2, n, 8.0).unwrap();
        Field::from_values(&g, Representation::Physical, vals).unwrap()
    })
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plancherel_holds_for_every_field(u in field_2d(8)) {
        let phys = u.norm_sq_lattice();
        let spec = u.to_spectral().norm_sq_lattice();
        prop_assert!((phys - spec).abs() <= 1e-12 * phys.max(1.0));
    }

    #[test]
    fn symbol_application_composes_to_the_product_symbol(
        u in field_1d(32, Representation::Physical),
        s1 in -2.0f64..2.0,
        s2 in -2.0f64..2.0,
    ) {
        let a = SymbolSpec::Bracket { s: s1 };
        let b = SymbolSpec::Bracket { s: s2 };
        let two_pass = apply_symbol(&apply_symbol(&u, &a).unwrap(), &b).unwrap();
        let one_pass = apply_symbol(&u, &SymbolSpec::Product(vec![a, b])).unwrap();
        let scale = one_pass.max_abs().max(1.0);
        prop_assert!(max_diff(&two_pass, &one_pass) <= 1e-12 * scale);
    }

    #[test]
    fn real_symbols_keep_real_fields_real(vals in prop::collection::vec(-1.0f64..1.0, 32)) {
        let g = make_grid(1, 32, 8.0).unwrap();
        let u = Field::from_values(
            &g,
            Representation::Physical,
            vals.into_iter().map(|re| Complex64::new(re, 0.0)).collect(),
        ).unwrap();
        let out = apply_symbol(&u, &SymbolSpec::Bracket { s: -1.0 }).unwrap().to_physical();
        let norm = out.max_abs().max(1e-30);
        let worst_im = out.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        prop_assert!(worst_im <= 1e-12 * norm);
    }

    #[test]
    fn the_smoothing_profile_is_a_monotone_unit_bump(
        r1 in 0.0f64..1e6,
        r2 in 0.0f64..1e6,
        exp in 0u32..4,
        s in 0.05f64..1.0,
    ) {
        let p = IParams::new((2.0f64).powi(exp as i32), s).unwrap();
        prop_assert_eq!(m_eval(0.0, &p), 1.0);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let (mlo, mhi) = (m_eval(lo, &p), m_eval(hi, &p));
        prop_assert!(mlo > 0.0 && mlo <= 1.0);
        prop_assert!(mhi <= mlo, "m must be nonincreasing: m({lo}) = {mlo} < m({hi}) = {mhi}");
    }

    #[test]
    fn the_smoothing_operator_is_linear(
        f in field_1d(16, Representation::Spectral),
        g in field_1d(16, Representation::Spectral),
        are in -2.0f64..2.0,
        aim in -2.0f64..2.0,
    ) {
        let p = IParams::new(2.0, 0.5).unwrap();
        let a = Complex64::new(are, aim);
        let combined = hartree_lab::grid::axpy(a, &f, Complex64::new(1.0, 0.0), &g).unwrap();
        let lhs = i_operator(&combined, &p);
        let rhs = hartree_lab::grid::axpy(
            a,
            &i_operator(&f, &p),
            Complex64::new(1.0, 0.0),
            &i_operator(&g, &p),
        ).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn smoothing_commutes_with_other_multipliers(u in field_1d(32, Representation::Spectral)) {
        let p = IParams::new(4.0, 0.7).unwrap();
        let b = SymbolSpec::Bracket { s: 1.3 };
        let iw = apply_symbol(&i_operator(&u, &p), &b).unwrap();
        let wi = i_operator(&apply_symbol(&u, &b).unwrap(), &p);
        prop_assert!(max_diff(&iw, &wi) <= 1e-12 * iw.max_abs().max(1.0));
    }

    #[test]
    fn modified_energy_is_the_energy_below_the_threshold(band in complex_vec(3)) {
        // spectrum confined to |k| <= 1 on a unit-spacing box: every mode sits
        // under N = 4, so I is bitwise the identity and Ẽ(u) == E(u) exactly
        let g = make_grid(1, 8, 2.0 * std::f64::consts::PI).unwrap();
        let mp = ModelParams::new(1, 0.5).unwrap();
        let p = IParams::new(4.0, 0.6).unwrap();
        let mut vals = vec![Complex64::default(); 8];
        for (k, v) in [-1i64, 0, 1].iter().zip(band) {
            vals[g.flat_of_kvec(&[*k])] = v;
        }
        let u = Field::from_values(&g, Representation::Spectral, vals).unwrap();
        prop_assert_eq!(modified_energy(&u, &p, &mp).unwrap(), energy(&u, &mp).unwrap());
    }

    #[test]
    fn functionals_ignore_phase_and_translation(
        u in field_1d(64, Representation::Physical),
        theta in 0.0f64..std::f64::consts::TAU,
        shift in 0usize..64,
    ) {
        let mp = ModelParams::new(1, 0.5).unwrap();
        let rot = Complex64::from_polar(1.0, theta);
        let mut vals: Vec<Complex64> = u.values().iter().map(|v| v * rot).collect();
        vals.rotate_right(shift);
        let v = Field::from_values(u.grid(), Representation::Physical, vals).unwrap();

        let scale = mass(&u).max(1.0);
        prop_assert!((mass(&u) - mass(&v)).abs() <= 1e-10 * scale);
        let (eu, ev) = (energy(&u, &mp).unwrap(), energy(&v, &mp).unwrap());
        prop_assert!((eu - ev).abs() <= 1e-10 * eu.abs().max(1.0));
        let (su, sv) = (
            sobolev_norm(&u, 0.6, false).unwrap(),
            sobolev_norm(&v, 0.6, false).unwrap(),
        );
        prop_assert!((su - sv).abs() <= 1e-10 * su.max(1.0));
    }

    #[test]
    fn defocusing_energies_are_nonnegative(u in field_2d(8)) {
        let mp = ModelParams::new(2, 1.5).unwrap();
        let p = IParams::new(2.0, 0.6).unwrap();
        let floor = -1e-12 * mass(&u).max(1.0);
        prop_assert!(energy(&u, &mp).unwrap() >= floor);
        prop_assert!(modified_energy(&u, &p, &mp).unwrap() >= floor);
    }

    #[test]
    fn the_potential_is_translation_covariant(
        u in field_1d(64, Representation::Physical),
        shift in 0usize..64,
    ) {
        let mp = ModelParams::new(1, 0.5).unwrap();
        let pot_then_shift = {
            let mut vals = hartree_potential(&u, &mp).unwrap().to_physical().into_values();
            vals.rotate_right(shift);
            vals
        };
        let shift_then_pot = {
            let mut vals = u.values().to_vec();
            vals.rotate_right(shift);
            let v = Field::from_values(u.grid(), Representation::Physical, vals).unwrap();
            hartree_potential(&v, &mp).unwrap().to_physical().into_values()
        };
        let scale = pot_then_shift.iter().map(|v| v.norm()).fold(1e-30, f64::max);
        let worst = pot_then_shift
            .iter()
            .zip(&shift_then_pot)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        prop_assert!(worst <= 1e-10 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn one_step_forward_one_step_back_returns_the_state(
        u in field_1d(32, Representation::Physical),
        dt in 1e-4f64..1e-2,
    ) {
        let mp = ModelParams::new(1, 0.5).unwrap();
        let fwd = step_strang(&u, dt, &mp, true).unwrap();
        let back = step_strang(&fwd, -dt, &mp, true).unwrap().to_physical();
        // dealiasing projects once on the way in; compare against the
        // projected start so both sides live in the same band
        let u_proj = step_strang(&u, 0.0, &mp, true).unwrap().to_physical();
        prop_assert!(max_diff(&back, &u_proj) <= 1e-10 * u_proj.max_abs().max(1.0));
    }

    #[test]
    fn a_global_phase_rides_through_the_step(
        u in field_1d(32, Representation::Physical),
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let mp = ModelParams::new(1, 0.5).unwrap();
        let rot = Complex64::from_polar(1.0, theta);
        let rotated = Field::from_values(
            u.grid(),
            Representation::Physical,
            u.values().iter().map(|v| v * rot).collect(),
        ).unwrap();
        let step_then_rot: Vec<Complex64> = step_strang(&u, 1e-3, &mp, true)
            .unwrap()
            .to_physical()
            .values()
            .iter()
            .map(|v| v * rot)
            .collect();
        let rot_then_step = step_strang(&rotated, 1e-3, &mp, true).unwrap().to_physical();
        let scale = rot_then_step.max_abs().max(1.0);
        let worst = step_then_rot
            .iter()
            .zip(rot_then_step.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        prop_assert!(worst <= 1e-12 * scale);
    }

    #[test]
    fn csv_floats_survive_the_round_trip(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        let text = format!("{v}");
        let back: f64 = text.parse().unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }
}
