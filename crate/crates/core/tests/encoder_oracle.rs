//! The encoder against a brute-force evaluation written directly from the
//! index formulas: with right rotation `rho^s(v)[d] = v[(d - s) mod D]`,
//!
//! `F[d] = sum_i C_i[d] * prod_{t=1..n} level(x_{i,t})[(d - (n - t)) mod D]`.

use hdc_eeg::encoder::{encode_window_all_channels, segment, NGramWindow, SpatioTemporalEncoder};
use hdc_eeg::hv::Seed;
use hdc_eeg::memory::{Class, ContinuousItemMemory, ItemMemory};
use hdc_eeg::preprocess::QuantizedRecording;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

fn brute_force(windows: &[Vec<u16>], im: &ItemMemory, cim: &ContinuousItemMemory) -> Vec<i32> {
    let dim = cim.dimension();
    let n = windows[0].len();
    let mut f = vec![0i32; dim];
    for (i, window) in windows.iter().enumerate() {
        let key = im.vectors()[i].components();
        for d in 0..dim {
            let mut product = 1i32;
            for t in 1..=n {
                let shift = n - t;
                let src = (d + dim * n - shift) % dim;
                product *= cim.levels()[window[t - 1] as usize].components()[src];
            }
            f[d] += key[d] * product;
        }
    }
    f
}

#[test]
fn encoder_matches_brute_force_on_random_windows() {
    let (dim, n, levels) = (16, 3, 4);
    let names = vec!["F4".to_string(), "Cz".to_string()];
    let mut rng = SplitMix64::seed_from_u64(2024);
    for trial in 0..1000u64 {
        let im = ItemMemory::build(&names, Seed(trial), dim).unwrap();
        let cim = ContinuousItemMemory::build(levels, Seed(trial + 1_000_000), dim).unwrap();
        let windows: Vec<Vec<u16>> = (0..2)
            .map(|_| (0..n).map(|_| rng.random_range(0..levels as u16)).collect())
            .collect();
        let expected = brute_force(&windows, &im, &cim);

        let reference = encode_window_all_channels(
            &windows
                .iter()
                .enumerate()
                .map(|(channel, levels)| NGramWindow {
                    channel,
                    index: 0,
                    levels: levels.clone(),
                })
                .collect::<Vec<_>>(),
            &names,
            &im,
            &cim,
        )
        .unwrap();
        assert_eq!(reference.components(), &expected[..], "reference path, trial {trial}");

        let encoder = SpatioTemporalEncoder::new(im, cim, n).unwrap();
        let packed = encoder
            .encode_windows(&names, &[windows[0].as_slice(), windows[1].as_slice()])
            .unwrap();
        assert_eq!(packed.components(), &expected[..], "packed path, trial {trial}");
    }
}

#[test]
fn encoder_matches_brute_force_on_default_shape() {
    let names = vec!["F4".to_string(), "Cz".to_string()];
    let im = ItemMemory::build(&names, Seed(5), 10_000).unwrap();
    let cim = ContinuousItemMemory::build(250, Seed(6), 10_000).unwrap();
    let mut rng = SplitMix64::seed_from_u64(7);
    let rec = QuantizedRecording {
        patient_id: "p".into(),
        label: Class::Adhd,
        channels: names.clone(),
        levels: (0..2)
            .map(|_| (0..896).map(|_| rng.random_range(0..250u16)).collect())
            .collect(),
        level_count: 250,
    };
    let encoder = SpatioTemporalEncoder::new(im.clone(), cim.clone(), 32).unwrap();
    let encoded = encoder.encode_patient(&rec).unwrap();
    assert_eq!(encoded.len(), 28);
    let windows = segment(&rec, 32).unwrap();
    for j in [0, 13, 27] {
        let expected = brute_force(&[windows[0][j].levels.clone(), windows[1][j].levels.clone()], &im, &cim);
        assert_eq!(encoded[j].vector.components(), &expected[..], "window {j}");
    }
}

#[test]
fn channel_contributions_are_recoverable_through_the_bundle() {
    use hdc_eeg::encoder::encode_temporal;
    use hdc_eeg::hv::{bind, cosine_similarity};
    let names = vec!["F4".to_string(), "Cz".to_string()];
    let mut rng = SplitMix64::seed_from_u64(99);
    for trial in 0..50 {
        let im = ItemMemory::build(&names, Seed(trial), 10_000).unwrap();
        let cim = ContinuousItemMemory::build(250, Seed(trial + 500), 10_000).unwrap();
        let windows: Vec<NGramWindow> = (0..2)
            .map(|channel| NGramWindow {
                channel,
                index: 0,
                levels: (0..32).map(|_| rng.random_range(0..250u16)).collect(),
            })
            .collect();
        let f = encode_window_all_channels(&windows, &names, &im, &cim).unwrap();
        for (i, w) in windows.iter().enumerate() {
            let s = encode_temporal(w, &cim).unwrap();
            let unbound = bind(&f, im.get(&names[i]).unwrap()).unwrap();
            assert!(cosine_similarity(&unbound, &s).unwrap() > 0.4);
        }
    }
}
