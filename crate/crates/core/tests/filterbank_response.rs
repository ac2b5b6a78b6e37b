//! Filterbank responses checked against an independent evaluation of the
//! gammachirp in closed form (plain `(re, im)` arithmetic, direct sums).

use std::f64::consts::PI;

use soundtexture::filterbank::{Filterbank, FilterbankConfig};
use soundtexture::signal_io::{add_noise_floor, synthesize_archetype, Archetype, NoiseSpec, Signal};
use soundtexture::Execution;

type C = (f64, f64);

/// Normalized gammachirp taps for a channel centred at `f`.
fn oracle_taps(cfg: &FilterbankConfig, f: f64) -> Vec<C> {
    let rate = cfg.sample_rate as f64;
    let len = (cfg.t_max_s * rate).floor() as usize;
    let erb = cfg.erb0 + cfg.erb1 * f;
    let raw: Vec<C> = (0..len)
        .map(|k| {
            let t = k as f64 / rate;
            if k == 0 {
                return (0.0, 0.0);
            }
            let mag = t.powi(cfg.order as i32 - 1) * (-2.0 * PI * cfg.b1 * erb * t).exp();
            let ph = 2.0 * PI * f * t + cfg.c1 * t.ln();
            (mag * ph.cos(), mag * ph.sin())
        })
        .collect();
    let energy: f64 = raw.iter().map(|(a, b)| a * a + b * b).sum();
    let scale = 1.0 / (f * energy.sqrt());
    raw.into_iter().map(|(a, b)| (a * scale, b * scale)).collect()
}

fn abs2(z: C) -> f64 {
    z.0 * z.0 + z.1 * z.1
}

#[test]
fn impulse_response_reproduces_the_closed_form_taps() {
    let cfg = FilterbankConfig::default();
    let fb = Filterbank::new(&cfg).unwrap();
    let mut x = vec![0.0; cfg.filter_len() + 5 * cfg.decimation()];
    x[0] = 1.0;
    let amps = fb.amplitudes(&Signal::new(x, cfg.sample_rate).unwrap(), Execution::Parallel).unwrap();
    let d = cfg.decimation();
    let freqs = cfg.channel_frequencies();
    for ch in [0, 17, 66, 100, 132] {
        let taps = oracle_taps(&cfg, freqs[ch]);
        let peak = taps.iter().map(|&z| abs2(z)).fold(0.0, f64::max).sqrt();
        for k in 0..amps.nrows() {
            let g = k * d + d - 1;
            let want = taps.get(g).copied().unwrap_or((0.0, 0.0));
            let got = amps[[k, ch]];
            let err = ((got.re - want.0).powi(2) + (got.im - want.1).powi(2)).sqrt();
            assert!(err <= 1e-10 * peak, "channel {ch} frame {k}: error {err:e}, peak {peak:e}");
        }
    }
}

#[test]
fn steady_tone_level_matches_the_transfer_function() {
    let cfg = FilterbankConfig::default();
    let fb = Filterbank::new(&cfg).unwrap();
    let (freq, amp) = (1000.0, 10_000.0);
    let tone = synthesize_archetype(Archetype::Tone { frequency_hz: freq }, 2.0, amp, cfg.sample_rate).unwrap();
    let cg = fb.cochleagram(&tone, Execution::Parallel).unwrap();
    let steady = cfg.filter_len_frames()..cg.n_frames();

    // |H(e^{iω})|² per channel; a real tone of amplitude A puts A²/4 · |H|²
    // into the analytic-side response.
    let w = 2.0 * PI * freq / cfg.sample_rate as f64;
    let predicted: Vec<f64> = cfg
        .channel_frequencies()
        .iter()
        .map(|&f| {
            let h = oracle_taps(&cfg, f).iter().enumerate().fold((0.0, 0.0), |acc, (k, &(a, b))| {
                let (c, s) = ((w * k as f64).cos(), -(w * k as f64).sin());
                (acc.0 + a * c - b * s, acc.1 + a * s + b * c)
            });
            10.0 * (amp * amp / 4.0 * abs2(h)).log10()
        })
        .collect();
    let measured: Vec<f64> = (0..cg.n_channels())
        .map(|c| steady.clone().map(|t| cg.log_energy()[[t, c]]).sum::<f64>() / steady.len() as f64)
        .collect();

    let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    assert_eq!(argmax(&measured), argmax(&predicted));
    let top = predicted[argmax(&predicted)];
    for c in 0..predicted.len() {
        if predicted[c] > top - 20.0 {
            assert!(
                (measured[c] - predicted[c]).abs() < 0.1,
                "channel {c}: measured {:.3} dB, predicted {:.3} dB",
                measured[c],
                predicted[c]
            );
        }
    }
}

#[test]
fn sequential_fallback_is_bitwise_identical() {
    let cfg = FilterbankConfig::default();
    let fb = Filterbank::new(&cfg).unwrap();
    let clicks = synthesize_archetype(Archetype::ClickTrain { rate_hz: 7.0 }, 1.5, 5000.0, cfg.sample_rate).unwrap();
    // between clicks the response decays below round-off; the floor keeps energies positive
    let clicks = add_noise_floor(&clicks, &NoiseSpec::default()).unwrap();
    let a = fb.cochleagram(&clicks, Execution::Sequential).unwrap();
    let b = fb.cochleagram(&clicks, Execution::Parallel).unwrap();
    assert_eq!(a.log_energy(), b.log_energy());
}
