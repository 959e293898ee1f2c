mod common;

use common::{circular_convolution, max_abs_diff, random_block, random_symbols, rng, T_REF};
use frfdm::chain::{receive_unequalized, transmit, ChainConfig};
use frfdm::channels::{
    apply_awgn, apply_ltv, apply_static, draw_rayleigh, end_to_end_columns, ici_power, mean_power,
    ofdm_ici_power, reference_ltv_channel, ChannelKind, ChannelRealization, PowerDelayProfile,
    Tap, REFERENCE_LTV_GAINS_DB,
};
use frfdm::search::periodic_span;
use frfdm::{FrfdmParams, C64};
use nalgebra::DMatrix;
use rand::Rng;

#[test]
fn rayleigh_draws_have_unit_average_power() {
    let mut r = rng(50);
    for profile in [PowerDelayProfile::Uniform, PowerDelayProfile::Exponential { decay_taps: 1.5 }] {
        let draws = 10_000;
        let total: f64 = (0..draws)
            .map(|_| draw_rayleigh(6, profile, &mut r).unwrap().total_power())
            .sum();
        let mean = total / draws as f64;
        assert!((mean - 1.0).abs() <= 0.05, "{profile:?}: {mean}");
    }
    let ch = draw_rayleigh(6, PowerDelayProfile::Uniform, &mut r).unwrap();
    let delays: Vec<usize> = ch.taps().iter().map(|t| t.delay).collect();
    assert_eq!(delays, vec![0, 1, 2, 3, 4, 5]);
    assert_eq!(ch.kind(), ChannelKind::Static);
    let single = draw_rayleigh(1, PowerDelayProfile::Uniform, &mut r).unwrap();
    let h = single.frequency_response(16);
    assert!(h.iter().all(|v| (v.norm() - h[0].norm()).abs() < 1e-12));
}

#[test]
fn prefix_turns_convolution_circular() {
    let mut r = rng(51);
    let (n, cp) = (4usize, 2usize);
    let g = [C64::new(0.8, -0.3), C64::new(0.2, 0.5)];
    let ch = ChannelRealization::new(
        vec![
            Tap { gain: g[0], delay: 0, doppler_hz: 0.0 },
            Tap { gain: g[1], delay: 2, doppler_hz: 0.0 },
        ],
        ChannelKind::Static,
    )
    .unwrap();
    for _ in 0..10 {
        let body = random_symbols(n, &mut r);
        let mut frame = body[n - cp..].to_vec();
        frame.extend_from_slice(&body);
        let rx = apply_static(&frame, &ch, 1);
        let expected = circular_convolution(&body, &[(0, g[0]), (2, g[1])]);
        assert!(max_abs_diff(&rx[cp..], &expected) <= 1e-12);
    }
}

#[test]
fn trivial_static_channels() {
    let mut r = rng(52);
    let x = random_symbols(40, &mut r);
    assert_eq!(apply_static(&x, &ChannelRealization::identity(), 3), x);
    let g = C64::new(0.3, -1.1);
    let y = apply_static(&x, &ChannelRealization::from_gains(&[g]).unwrap(), 3);
    let scaled: Vec<C64> = x.iter().map(|v| v * g).collect();
    assert!(max_abs_diff(&y, &scaled) <= 1e-15);
    assert!(ChannelRealization::new(Vec::new(), ChannelKind::Static).is_err());
    let bad = vec![
        Tap { gain: g, delay: 2, doppler_hz: 0.0 },
        Tap { gain: g, delay: 2, doppler_hz: 0.0 },
    ];
    assert!(ChannelRealization::new(bad, ChannelKind::Static).is_err());
    let moving = vec![Tap { gain: g, delay: 0, doppler_hz: 10.0 }];
    assert!(ChannelRealization::new(moving, ChannelKind::Static).is_err());
}

#[test]
fn ltv_without_doppler_is_static() {
    let mut r = rng(53);
    let ltv = reference_ltv_channel(2e-6, &mut r).unwrap();
    assert_eq!(ltv.max_delay(), 20);
    for (tap, db) in ltv.taps().iter().zip(REFERENCE_LTV_GAINS_DB) {
        assert!((20.0 * tap.gain.norm().log10() - db).abs() < 1e-12);
    }
    let x = random_symbols(900, &mut r);
    let frozen = ltv.to_static();
    assert_eq!(apply_ltv(&x, &frozen, 5e6, 2), apply_static(&x, &frozen, 2));
}

#[test]
fn single_path_doppler_is_a_frequency_shift() {
    let mut r = rng(54);
    let ch = ChannelRealization::new(
        vec![Tap { gain: C64::new(1.0, 0.0), delay: 0, doppler_hz: 1234.0 }],
        ChannelKind::Ltv,
    )
    .unwrap();
    let fs = 5e6;
    let x = random_symbols(640, &mut r);
    let y = apply_ltv(&x, &ch, fs, 10);
    assert!((mean_power(&y) - mean_power(&x)).abs() <= 1e-12 * mean_power(&x));
    let w = 2.0 * std::f64::consts::PI * 1234.0 / fs;
    for i in [0usize, 1, 100, 639] {
        assert!((y[i] - x[i] * C64::from_polar(1.0, w * i as f64)).norm() <= 1e-12);
    }
}

#[test]
fn noise_matches_requested_snr() {
    let mut r = rng(55);
    let x = random_symbols(1_000_000, &mut r);
    let p = mean_power(&x);
    for &snr_db in &[0.0, 10.0, 25.0] {
        let y = apply_awgn(&x, snr_db, 1, &mut r).unwrap();
        let noise: Vec<C64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let measured = 10.0 * (p / mean_power(&noise)).log10();
        assert!((measured - snr_db).abs() <= 0.1, "{snr_db} dB: measured {measured}");
        if snr_db == 0.0 {
            assert!((mean_power(&noise) / p - 1.0).abs() <= 0.02);
        }
    }
    assert_eq!(apply_awgn(&x[..100], f64::INFINITY, 4, &mut r).unwrap(), x[..100].to_vec());
}

#[test]
fn oversampled_noise_is_scaled_per_symbol() {
    let mut r = rng(56);
    let (n, l) = (64usize, 10usize);
    let p = FrfdmParams::new(n, l, T_REF, 0.0).unwrap();
    let cfg = ChainConfig::new(0);
    let mut noise = 0.0;
    let blocks = 300;
    for _ in 0..blocks {
        let s = random_block(n, &mut r);
        let frame = transmit(&p, &cfg, &s).unwrap();
        let y = apply_awgn(&frame.samples, 10.0, l, &mut r).unwrap();
        let est = receive_unequalized(&p, &cfg, &y).unwrap();
        noise += est.values().iter().zip(s.values()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    }
    let per_symbol = noise / (blocks * n) as f64;
    let signal = 1.0;
    assert!((10.0 * (signal / per_symbol).log10() - 10.0).abs() <= 0.15);
}

#[test]
fn static_channels_cause_no_ici() {
    let mut r = rng(57);
    let (n, l) = (64usize, 10usize);
    let cfg = ChainConfig::new(20);
    let span = periodic_span(T_REF).unwrap();
    let ch = reference_ltv_channel(T_REF / n as f64, &mut r).unwrap().to_static();
    for i in 0..9 {
        let delta = -span + i as f64 * span / 4.0;
        let p = FrfdmParams::new(n, l, T_REF, delta).unwrap();
        let rep = ici_power(&p, &cfg, &ch).unwrap();
        assert!(rep.ici_power <= 1e-18, "delta={delta}: {:e}", rep.ici_power);
        assert!(rep.signal_power > 0.1);
    }
}

#[test]
fn fourier_point_ici_matches_ofdm_bit_for_bit() {
    let mut r = rng(58);
    let (n, l) = (64usize, 10usize);
    let ch = reference_ltv_channel(T_REF / n as f64, &mut r).unwrap();
    let p = FrfdmParams::new(n, l, T_REF, 0.0).unwrap();
    let a = ici_power(&p, &ChainConfig::new(20), &ch).unwrap();
    let b = ofdm_ici_power(n, l, T_REF, 20, &ch).unwrap();
    assert_eq!(a, b);
    assert!(a.ici_power > 0.0);
    assert!(ici_power(&p, &ChainConfig::new(10), &ch).is_err());
}

#[test]
fn probing_agrees_with_least_squares() {
    let mut r = rng(59);
    let (n, l) = (12usize, 4usize);
    let t = 1.2;
    let p = FrfdmParams::new(n, l, t, r.random_range(-0.3..0.3)).unwrap();
    let cfg = ChainConfig::new(4);
    let ch = ChannelRealization::new(
        vec![
            Tap { gain: C64::new(0.9, 0.1), delay: 0, doppler_hz: 0.2 },
            Tap { gain: C64::new(-0.3, 0.4), delay: 2, doppler_hz: -0.5 },
            Tap { gain: C64::new(0.1, 0.2), delay: 4, doppler_hz: 0.9 },
        ],
        ChannelKind::Ltv,
    )
    .unwrap();
    let columns = end_to_end_columns(&p, &cfg, &ch).unwrap();
    let probed = DMatrix::from_fn(n, n, |k, c| columns[c][k]);

    let probes = 3 * n;
    let mut s_mat = DMatrix::<C64>::zeros(n, probes);
    let mut y_mat = DMatrix::<C64>::zeros(n, probes);
    for j in 0..probes {
        let s = random_block(n, &mut r);
        let frame = transmit(&p, &cfg, &s).unwrap();
        let rx = apply_ltv(&frame.samples, &ch, p.sample_rate(), l);
        let y = receive_unequalized(&p, &cfg, &rx).unwrap();
        for k in 0..n {
            s_mat[(k, j)] = s.values()[k];
            y_mat[(k, j)] = y.values()[k];
        }
    }
    let gram = (&s_mat * s_mat.adjoint()).try_inverse().unwrap();
    let fitted = &y_mat * s_mat.adjoint() * gram;
    let err = (&fitted - &probed).iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(err <= 1e-9, "{err:e}");
}

/// Measured after the prefix is stripped, where the convolution is circular.
#[test]
fn static_convolution_keeps_frame_power() {
    let mut r = rng(60);
    let (n, l, cp) = (64usize, 10usize, 10usize);
    let ch = ChannelRealization::new(
        vec![
            Tap { gain: C64::new(0.6, 0.0), delay: 0, doppler_hz: 0.0 },
            Tap { gain: C64::new(0.0, 0.64), delay: 3, doppler_hz: 0.0 },
            Tap { gain: C64::new(-0.48, 0.0), delay: 7, doppler_hz: 0.0 },
        ],
        ChannelKind::Static,
    )
    .unwrap();
    assert!((ch.total_power() - 1.0).abs() < 1e-12);
    let p = FrfdmParams::new(n, l, T_REF, 0.0).unwrap();
    let cfg = ChainConfig::new(cp);
    let (mut before, mut after) = (0.0, 0.0);
    for _ in 0..2000 {
        let frame = transmit(&p, &cfg, &random_block(n, &mut r)).unwrap();
        before += mean_power(frame.body());
        after += mean_power(&apply_static(&frame.samples, &ch, l)[frame.cp_len..]);
    }
    assert!((after / before - 1.0).abs() <= 0.02, "{}", after / before);
}
