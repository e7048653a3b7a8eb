use afdm_core::analysis::{self, brute_force, MatrixKind};
use afdm_core::channel::{apply_channel, ChannelModel, ChannelRealization, PathSpec};
use afdm_core::harness::{Execution, FrameRunner, Scheme, SweepSpec};
use afdm_core::params::{build_config, AfdmConfig, Constellation};
use afdm_core::zp_afdm::{interference_power, zero_pad, ZpAfdmModem};
use afdm_core::Complex64;
use proptest::prelude::*;

fn small_cfg(chi: u32) -> AfdmConfig {
    build_config(chi, 1, 1, 32, Constellation::Qpsk).unwrap()
}

fn channel(c: &AfdmConfig) -> impl Strategy<Value = ChannelRealization> {
    let k = c.k_max as i64;
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0..=c.l_max, -k..=k), 1..5).prop_map(|v| {
        ChannelRealization::new(v.into_iter().map(|(re, im, l, d)| PathSpec::new(Complex64::new(re, im), l, d)).collect())
            .unwrap()
    })
}

fn symbols(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b)), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_forms_match_brute_force((chi, chan) in (1u32..=2).prop_flat_map(|chi| (Just(chi), channel(&small_cfg(chi))))) {
        let c = small_cfg(chi);
        for kind in [MatrixKind::Aff, MatrixKind::AffZp, MatrixKind::AffRecon, MatrixKind::Foa, MatrixKind::Freq] {
            let d = analysis::build(kind, &chan, &c).unwrap().max_abs_diff(&brute_force(kind, &chan, &c));
            prop_assert!(d < 1e-9, "{kind:?}: {d}");
        }
    }

    #[test]
    fn chain_matches_effective_matrix(chan in channel(&small_cfg(2)), x in symbols(small_cfg(2).n_data)) {
        let c = small_cfg(2);
        let modem = ZpAfdmModem::new(&c).unwrap();
        let frame = zero_pad(&x, &c).unwrap();
        let r = apply_channel(&modem.modulate(&frame).unwrap(), &chan, &c).unwrap();
        let y = modem.demodulate(&r).unwrap();
        let h = analysis::build(MatrixKind::AffZp, &chan, &c).unwrap();
        let y_mat = h.apply(&frame.data).unwrap();
        let d = y.iter().zip(&y_mat).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn interference_is_bounded_by_channel_power(chan in channel(&small_cfg(2))) {
        let p = interference_power(&chan, &small_cfg(2));
        prop_assert!(p >= 0.0 && p <= chan.total_power() + 1e-12);
    }

    #[test]
    fn sequential_and_parallel_agree(seed in any::<u64>()) {
        let c = build_config(2, 2, 1, 64, Constellation::Qpsk).unwrap();
        let model = ChannelModel::Fig3;
        let spec = SweepSpec { min_bits: 0, min_errors: 0, max_frames: 40, ..SweepSpec::default() };
        let runner = FrameRunner::new(Scheme::ZpAfdm, &c, &model).unwrap();
        let a = runner.run_point(Scheme::ZpAfdm, 2, 8.0, &spec, seed, Execution::Sequential).unwrap();
        let b = runner.run_point(Scheme::ZpAfdm, 2, 8.0, &spec, seed, Execution::Parallel).unwrap();
        prop_assert!(a.same_result(&b));
    }
}
