use deutsch_noise::channels::{compose, gad_channel, GadParams, KrausChannel};
use deutsch_noise::metrics::{
    alignment, fidelity_qubit, fidelity_via_sqrt, isotropic_decompose, orthogonal_isotropic,
};
use deutsch_noise::numkit::{
    c, herm_eig, herm_eigvals_2x2, kron, mat_sqrt_psd, polar_unitary, ComplexMatrix, C64,
};
use deutsch_noise::qstate::{
    apply_unitary, computational_projectors, measure_probs, partial_trace, post_measure_state,
    DensityMatrix, PureState,
};
use deutsch_noise::tomography::{
    basis_probs, basis_rotation, reconstruct, Basis, PauliExpectations,
};
use proptest::prelude::*;

fn matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        ComplexMatrix::new(dim, dim, v.into_iter().map(|(re, im)| c(re, im)).collect()).unwrap()
    })
}

fn density(dim: usize) -> impl Strategy<Value = DensityMatrix> {
    matrix(dim).prop_filter_map("degenerate", |a| {
        let m = a.matmul(&a.adjoint());
        let t = m.trace().re;
        (t > 1e-6)
            .then(|| DensityMatrix::new(m.scale_re(1.0 / t)).ok())
            .flatten()
    })
}

fn unitary(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(dim).prop_filter_map("ill-conditioned", |a| polar_unitary(&a).ok())
}

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(dim).prop_map(|a| a.hermitian_part())
}

fn ket(dim: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map("zero", |v| {
        let amps: Vec<C64> = v.into_iter().map(|(re, im)| c(re, im)).collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        (n > 1e-3).then(|| PureState::new(amps.iter().map(|a| a / n).collect()).unwrap())
    })
}

fn gad() -> impl Strategy<Value = GadParams> {
    (0.0f64..=1.0, 0.5001f64..=1.0).prop_map(|(g, p)| GadParams::new(g, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eig_reconstructs_2(h in hermitian(2)) {
        let e = herm_eig(&h).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&h) < 1e-12);
        prop_assert!(e.vectors.unitarity_error() < 1e-12);
        let closed = herm_eigvals_2x2(&h).unwrap();
        prop_assert!((closed[0] - e.values[0]).abs() < 1e-12);
        prop_assert!((closed[1] - e.values[1]).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_4(h in hermitian(4)) {
        let e = herm_eig(&h).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&h) < 1e-12);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_reconstructs_8(h in hermitian(8)) {
        let e = herm_eig(&h).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&h) < 1e-11);
        prop_assert!(e.vectors.unitarity_error() < 1e-11);
    }

    #[test]
    fn qubit_fidelity_closed_form_matches_sqrt_route(a in density(2), b in density(2)) {
        let closed = fidelity_qubit(a.matrix(), b.matrix());
        let general = fidelity_via_sqrt(&a, &b).unwrap();
        prop_assert!((closed - general).abs() < 1e-7, "{closed} {general}");
        prop_assert!((fidelity_qubit(b.matrix(), a.matrix()) - closed).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kron_is_associative(a in matrix(2), b in matrix(2), d in matrix(2)) {
        let left = kron(&kron(&a, &b).unwrap(), &d).unwrap();
        let right = kron(&a, &kron(&b, &d).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-15);
    }

    #[test]
    fn kron_mixed_product(a in matrix(2), b in matrix(2), x in matrix(2), y in matrix(2)) {
        let lhs = kron(&a, &b).unwrap().matmul(&kron(&x, &y).unwrap());
        let rhs = kron(&a.matmul(&x), &b.matmul(&y)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn psd_sqrt_squares_back(rho in density(4)) {
        let r = mat_sqrt_psd(rho.matrix()).unwrap();
        prop_assert!(r.matmul(&r).max_abs_diff(rho.matrix()) < 1e-10);
        prop_assert!(r.hermiticity_error() < 1e-12);
    }

    #[test]
    fn polar_factor_is_unitary(u in unitary(4)) {
        prop_assert!(u.unitarity_error() < 1e-10);
    }

    #[test]
    fn unitary_conjugation_preserves_spectrum(rho in density(4), u in unitary(4)) {
        let out = apply_unitary(&rho, &u).unwrap();
        let before = herm_eig(rho.matrix()).unwrap().values;
        let after = herm_eig(out.matrix()).unwrap().values;
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_of_product(a in density(2), b in density(4)) {
        let joint = a.tensor(&b).unwrap();
        prop_assert!(partial_trace(&joint, &[0]).unwrap().max_abs_diff(&a) < 1e-12);
        prop_assert!(partial_trace(&joint, &[1, 2]).unwrap().max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn measurement_probabilities_sum_to_one(rho in density(8)) {
        let probs = measure_probs(&rho, &computational_projectors(3)).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(probs.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn post_measurement_is_idempotent(rho in density(4)) {
        let projectors = computational_projectors(2);
        let once = post_measure_state(&rho, &projectors).unwrap();
        let twice = post_measure_state(&once, &projectors).unwrap();
        prop_assert!(twice.max_abs_diff(&once) < 1e-15);
        prop_assert!((once.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gad_is_a_valid_channel(params in gad(), rho in density(2)) {
        let ch = gad_channel(params);
        prop_assert!(ch.completeness_error() < 1e-10);
        let out = ch.apply(&rho).unwrap();
        prop_assert!(herm_eig(out.matrix()).unwrap().values[0] > -1e-12);
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        let k = (1.0 - params.gamma).sqrt();
        prop_assert!((out.get(0, 1) - rho.get(0, 1) * k).norm() < 1e-12);
    }

    #[test]
    fn gad_fixed_point(params in gad()) {
        let fixed = DensityMatrix::new(ComplexMatrix::diag(&[params.p, 1.0 - params.p]).unwrap()).unwrap();
        let out = gad_channel(params).apply(&fixed).unwrap();
        prop_assert!(out.max_abs_diff(&fixed) < 1e-12);
    }

    #[test]
    fn composed_channels_stay_complete(a in gad(), b in gad(), u in unitary(2)) {
        let ch = compose(&KrausChannel::unitary("u", u).unwrap(), &gad_channel(a)).unwrap();
        let ch = compose(&ch, &gad_channel(b)).unwrap();
        prop_assert!(ch.completeness_error() < 1e-10);
    }

    #[test]
    fn tomography_round_trip(rho in density(2)) {
        let e = PauliExpectations::of_state(&rho).unwrap();
        prop_assert!(reconstruct(&e).max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn basis_rotation_maps_eigenbasis(basis in prop::sample::select(Basis::ALL.to_vec()), rho in density(2)) {
        // <P> = p0 - p1 after rotating into the computational basis.
        let [p0, p1] = basis_probs(&rho, basis).unwrap();
        let direct = rho.matrix().matmul(&basis.pauli()).trace().re;
        prop_assert!((p0 - p1 - direct).abs() < 1e-12);
        prop_assert!(basis_rotation(basis).unitarity_error() < 1e-12);
    }

    #[test]
    fn isotropic_decomposition_recomposes(rho in density(2)) {
        let dec = isotropic_decompose(&rho).unwrap();
        prop_assume!(!dec.degenerate);
        let mixed = ComplexMatrix::identity(2).scale_re(dec.weight / 2.0);
        let back = &mixed + &dec.rho_hat.matrix().scale_re(1.0 - dec.weight);
        prop_assert!(back.max_abs_diff(rho.matrix()) < 1e-10);
        prop_assert!(herm_eig(dec.rho_hat.matrix()).unwrap().values[0].abs() < 1e-10);
    }

    #[test]
    fn alignment_is_unitarily_covariant(rho in density(2), phi in ket(2), u in unitary(2)) {
        let a = alignment(&rho, &phi).unwrap();
        let rotated = apply_unitary(&rho, &u).unwrap();
        let amps = u.matmul(&ComplexMatrix::column(phi.amplitudes()).unwrap()).as_slice().to_vec();
        let phi_rot = PureState::new(amps).unwrap();
        let b = alignment(&rotated, &phi_rot).unwrap();
        prop_assert!((a - b).abs() < 1e-8, "{a} {b}");
        prop_assert!((-1.0..=1.0).contains(&a));
    }

    #[test]
    fn orthogonal_complement_has_zero_overlap(phi in ket(4)) {
        let comp = orthogonal_isotropic(&phi);
        prop_assert!(comp.matrix().matmul(&phi.projector()).frobenius_norm() < 1e-12);
    }
}
