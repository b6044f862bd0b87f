use proptest::prelude::*;
use retropop_core::emotion::{CutSide, TrajectoryEntry};
use retropop_core::event::TICKS_PER_BAR;
use retropop_core::harmony::{progression_for, Band};
use retropop_core::performers::{register_step, voicing_candidates};
use retropop_core::rhythm::density_from_roughness;
use retropop_core::rng::{bar_rng, Stream};
use retropop_core::{
    classify_region, generate_excerpt, render_bar, velocity_for, EmotionPoint, EmotionTrajectory, EngineConfig,
    EngineState, ExcerptSpec, Key, Mode, RegionSpec, Track,
};

fn point() -> impl Strategy<Value = EmotionPoint> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(v, a)| EmotionPoint::new(v, a))
}

fn key() -> impl Strategy<Value = Key> {
    (0u8..12, any::<bool>()).prop_map(|(tonic, minor)| Key { tonic, mode: if minor { Mode::Minor } else { Mode::Major } })
}

fn spec() -> impl Strategy<Value = ExcerptSpec> {
    (prop_oneof![Just(4u32), Just(8), Just(16), Just(32)], any::<u64>(), key()).prop_flat_map(|(bars, seed, key)| {
        proptest::collection::vec(point(), bars as usize).prop_map(move |points| ExcerptSpec {
            bars,
            trajectory: EmotionTrajectory::per_bar(points).unwrap(),
            seed,
            key,
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emotion_point_is_clamped(v in proptest::num::f64::ANY, a in proptest::num::f64::ANY) {
        let p = EmotionPoint::new(v, a);
        prop_assert!((0.0..=1.0).contains(&p.valence()));
        prop_assert!((0.0..=1.0).contains(&p.arousal()));
    }

    #[test]
    fn trajectory_bars_must_increase_from_zero(bars in proptest::collection::vec(0u32..64, 1..8)) {
        let entries: Vec<_> = bars.iter().map(|&bar| TrajectoryEntry { bar, point: EmotionPoint::NEUTRAL }).collect();
        let ok = bars[0] == 0 && bars.windows(2).all(|w| w[0] < w[1]);
        prop_assert_eq!(EmotionTrajectory::new(entries).is_ok(), ok);
    }

    #[test]
    fn register_walk_stays_in_range(seed in any::<u64>(), max in 1u8..4, val in 0.0..=1.0f64, start in 0u8..4) {
        let mut rng = bar_rng(seed, 0, Stream::Strummed);
        let mut inv = start.min(max);
        for _ in 0..200 {
            inv = register_step(inv, max, val, 0.6, &mut rng);
            prop_assert!(inv <= max);
        }
    }

    #[test]
    fn density_is_non_increasing(a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(density_from_roughness(hi) <= density_from_roughness(lo));
        prop_assert!((1..=8).contains(&density_from_roughness(lo)));
    }

    #[test]
    fn progressions_follow_the_template(seed in any::<u64>(), vals in proptest::collection::vec(0.0..=1.0f64, 32)) {
        let config = EngineConfig::default();
        let chords = progression_for(&config.template, 32, &vals, &config.graph, &mut bar_rng(seed, 0, Stream::Harmony)).unwrap();
        for (bar, id) in chords.iter().enumerate() {
            prop_assert_eq!(&config.graph.chord(*id).function, config.template.function_at(bar as u32));
        }
        let again = progression_for(&config.template, 32, &vals, &config.graph, &mut bar_rng(seed, 0, Stream::Harmony)).unwrap();
        prop_assert_eq!(chords, again);
    }

    #[test]
    fn excerpts_obey_track_rules(spec in spec()) {
        let config = EngineConfig::default();
        let ex = generate_excerpt(&config, &spec).unwrap();
        let offset = spec.key.offset() as i16;
        prop_assert!(ex.stream.is_sorted());
        prop_assert_eq!(ex.stream.end_tick, spec.bars * TICKS_PER_BAR);
        for info in &ex.bars {
            let chord = config.graph.chord(info.chord);
            let pcs: Vec<u8> = chord.tones().iter().map(|&pc| (pc as i16 + offset).rem_euclid(12) as u8).collect();
            let root = pcs[0];
            let fifth = (chord.root as i16 + chord.quality.intervals()[2] as i16 + offset).rem_euclid(12) as u8;
            let start = info.bar * TICKS_PER_BAR;
            let base = velocity_for(info.emotion.arousal());
            for n in ex.stream.events.iter().filter(|n| (start..start + TICKS_PER_BAR).contains(&n.onset)) {
                prop_assert!(n.velocity == base || n.velocity == (base + config.accent_boost).min(127), "{:?} in bar {}", n, info.bar);
                match n.track {
                    Track::Bass => prop_assert!(n.pitch % 12 == root || n.pitch % 12 == fifth),
                    Track::PluckedGtr | Track::StrummedGtr => prop_assert!(pcs.contains(&(n.pitch % 12)), "{:?} over {}", n, chord.name),
                    _ => {}
                }
            }
            let v = &info.voicing;
            prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(v.iter().all(|p| pcs.contains(&(p % 12))));
        }
        for block in ex.bars.chunks(8) {
            prop_assert!(block.iter().all(|b| b.bass == block[0].bass && b.percussion == block[0].percussion));
        }
    }

    #[test]
    fn saved_state_renders_the_same_future(seed in any::<u64>(), points in proptest::collection::vec(point(), 12), split in 1usize..11) {
        let config = EngineConfig::default();
        let mut state = EngineState::new(seed, Key::default(), points[0]);
        let mut direct = Vec::new();
        let mut saved = None;
        for (bar, p) in points.iter().enumerate() {
            if bar == split {
                saved = Some(serde_json::to_string(&state).unwrap());
            }
            state.emotion = *p;
            let (render, next) = render_bar(&config, &state).unwrap();
            direct.push(render.notes);
            state = next;
        }
        let mut state: EngineState = serde_json::from_str(&saved.unwrap()).unwrap();
        for (bar, p) in points.iter().enumerate().skip(split) {
            state.emotion = *p;
            let (render, next) = render_bar(&config, &state).unwrap();
            prop_assert_eq!(&render.notes, &direct[bar]);
            state = next;
        }
    }
}

#[test]
fn every_value_lands_in_exactly_one_region() {
    let config = EngineConfig::default();
    let specs = [
        &config.banks.strummed.spec,
        &config.banks.percussion.spec,
        &config.banks.bass.spec,
        &config.motifs.spec,
    ];
    for spec in specs {
        for i in 0..=10_000 {
            let x = i as f64 / 10_000.0;
            let hits = spec.regions().iter().filter(|r| r.contains(x)).count();
            assert_eq!(hits, 1, "{x} in {hits} regions of {spec:?}");
        }
    }
}

#[test]
fn shipped_boundaries() {
    let config = EngineConfig::default();
    assert_eq!(classify_region(0.4, &config.banks.strummed.spec), "moderate");
    assert_eq!(classify_region(0.3, &config.banks.percussion.spec), "low");
    assert_eq!(classify_region(0.3, &config.motifs.spec), "moderate");
    assert_eq!(classify_region(0.7, &config.banks.percussion.spec), "moderate");
    assert_eq!(classify_region(0.7, &config.banks.strummed.spec), "high");
    let custom = RegionSpec::from_cuts(&["a", "b"], &[0.5], CutSide::Below).unwrap();
    assert_eq!(classify_region(0.5, &custom), "a");
}

#[test]
fn low_valence_bar_samples_the_low_band() {
    let config = EngineConfig::default();
    let g = &config.graph;
    let vals = [0.1, 0.8, 0.7, 0.8];
    assert_eq!(g.band(vals[0]), Band::Low);
    assert!(vals[1..].iter().all(|&v| g.band(v) == Band::High));
    let mut prev = g.start();
    let mut rng = bar_rng(4, 0, Stream::Harmony);
    for (bar, &v) in vals.iter().enumerate() {
        let function = config.template.function_at(bar as u32);
        let band_targets: Vec<_> = g.edges(prev, g.band(v)).iter().filter(|e| e.probability > 0.0).map(|e| e.to).collect();
        for (id, _) in g.candidates(prev, v, function).unwrap() {
            assert!(band_targets.contains(&id), "bar {bar}: {id:?} is not an edge of the {:?} band", g.band(v));
        }
        prev = g.next_for_function(prev, v, function, &mut rng).unwrap();
    }
}

#[test]
fn candidate_voicings_cover_the_strum_range() {
    let config = EngineConfig::default();
    for chord in config.graph.chords() {
        for t in -5..=6 {
            let cands = voicing_candidates(chord, t, config.strum_range());
            assert!(!cands.is_empty());
            for v in &cands {
                assert!(config.strum_range().contains(&v.bass()));
                assert!((v.inversion as usize) < chord.size());
                assert!(v.notes.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
