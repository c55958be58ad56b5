//! End-to-end use of the public API: synthetic imagery through
//! normalisation, descriptors, whitening and retrieval.

use std::collections::HashMap;

use lumen::descriptor::{extract_toy_descriptor, read_descriptors, write_descriptors, DescriptorSet, ToyDescriptorConfig};
use lumen::exposure::{interpolate_exposure, synth_levels, ExposurePair, DEFAULT_ALPHAS};
use lumen::fixtures::{day_night_corpus, night_version, synthetic_scene, NightConfig, SceneConfig};
use lumen::mining::{candidate_positives, mine_hard_negatives, select_hard_positives, MiningThresholds, SfmImageRecord};
use lumen::photometric::{image_lightness, normalize_image, ClaheConfig, NormalisationMethod};
use lumen::raster::{pad_reflect_256, read_image, unpad, write_image};
use lumen::retrieval::mean_ap;
use lumen::whitening::{apply_whitening_set, learn_whitening, read_whitening, write_whitening, NonMatching, PairList};

fn small() -> SceneConfig {
    SceneConfig { width: 120, height: 80, shared_shapes: 6, shapes: 3, shading: 0.1 }
}

fn toy_set(images: &[(String, lumen::raster::RasterImage)], method: &NormalisationMethod) -> DescriptorSet {
    let cfg = ToyDescriptorConfig::default();
    let descs = images
        .iter()
        .map(|(id, img)| extract_toy_descriptor(id, &normalize_image(img, method).unwrap(), &cfg).unwrap());
    DescriptorSet::from_descriptors(cfg.dim(), descs).unwrap()
}

#[test]
fn normalisation_lifts_night_retrieval() {
    let corpus = day_night_corpus(12, &small(), &NightConfig::default(), 7).unwrap();
    let protocol = corpus.protocol();
    let none = toy_set(&corpus.images, &NormalisationMethod::None);
    let clahe = toy_set(&corpus.images, &NormalisationMethod::Clahe(ClaheConfig::default()));
    let base = mean_ap(&protocol, &none, &none).unwrap();
    let lifted = mean_ap(&protocol, &clahe, &clahe).unwrap();
    assert_eq!(base.per_query.len(), 24);
    assert!(lifted.map >= base.map, "{} vs {}", lifted.map, base.map);
}

#[test]
fn whitening_learned_on_day_night_pairs_round_trips_through_files() {
    let corpus = day_night_corpus(10, &small(), &NightConfig::default(), 3).unwrap();
    let set = toy_set(&corpus.images, &NormalisationMethod::HistEq);
    let matching = corpus
        .images
        .chunks(2)
        .map(|p| (p[0].0.clone(), p[1].0.clone()))
        .collect();
    let pairs = PairList::new(matching, NonMatching::CrossCluster { max_pairs: 500, seed: 1 });
    let t = learn_whitening(&set, &pairs, 16).unwrap();
    assert_eq!((t.input_dim(), t.output_dim()), (128, 16));

    let dir = tempfile::tempdir().unwrap();
    let (dsc, wht) = (dir.path().join("d.dsc1"), dir.path().join("w.wht1"));
    write_descriptors(&set, &dsc).unwrap();
    write_whitening(&t, &wht).unwrap();
    let back = read_whitening(&wht).unwrap();
    assert_eq!(back, t.to_f32_precision());

    let whitened = apply_whitening_set(&back, &read_descriptors(&dsc).unwrap()).unwrap();
    assert!(whitened.degenerate.is_empty());
    for d in whitened.set.iter() {
        assert!((d.norm() - 1.0).abs() < 1e-5);
    }
    let report = mean_ap(&corpus.protocol(), &whitened.set, &whitened.set).unwrap();
    assert!(report.map > 0.0);
}

#[test]
fn exposure_levels_bracket_the_pair() {
    let day = synthetic_scene(&small(), 0, 1);
    let short = night_version(&day, &NightConfig { alpha: 0.0, noise_sigma: 0.0, ..NightConfig::default() }, 2).unwrap();
    let pair = ExposurePair::new("s", short.clone(), day.clone()).unwrap();
    let levels = synth_levels(&pair, &DEFAULT_ALPHAS).unwrap();
    assert_eq!(levels.len(), DEFAULT_ALPHAS.len());
    let means: Vec<f64> = levels.iter().map(|l| l.mean()).collect();
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
    assert_eq!(interpolate_exposure(&pair, 0.0).unwrap(), short);
    assert_eq!(interpolate_exposure(&pair, 1.0).unwrap(), day);
}

#[test]
fn padded_png_survives_disk() {
    let img = synthetic_scene(&SceneConfig { width: 70, height: 45, ..small() }, 4, 4);
    let (padded, rec) = pad_reflect_256(&img).unwrap();
    assert_eq!((padded.width() % 256, padded.height() % 256), (0, 0));
    let dir = tempfile::tempdir().unwrap();
    for ext in ["png", "ppm"] {
        let path = dir.path().join(format!("p.{ext}"));
        write_image(&path, &padded).unwrap();
        assert_eq!(unpad(&read_image(&path).unwrap(), &rec).unwrap(), img);
    }
}

fn record(id: &str, cluster: &str, shift: f64) -> SfmImageRecord {
    let points = (0..8)
        .map(|i| [shift + f64::from(i % 2), f64::from((i / 2) % 2), f64::from(i / 4)])
        .collect();
    SfmImageRecord {
        id: id.into(),
        cluster: cluster.into(),
        camera_center: [shift, 0.0, -5.0],
        optical_axis: [0.0, 0.0, 1.0],
        points,
        trimmed_lightness: None,
    }
}

#[test]
fn mining_pairs_darkest_with_brightest_and_finds_other_cluster_negatives() {
    let day = synthetic_scene(&small(), 9, 1);
    let nights: Vec<_> = [0.1, 0.4, 1.0]
        .iter()
        .map(|&alpha| night_version(&day, &NightConfig { alpha, noise_sigma: 0.0, ..NightConfig::default() }, 5).unwrap())
        .collect();
    let records = vec![record("n0", "a", 0.0), record("n1", "a", 0.1), record("n2", "a", 0.2), record("o", "b", 50.0)];
    let lightness: HashMap<String, f64> = ["n0", "n1", "n2"]
        .iter()
        .zip(&nights)
        .map(|(id, img)| (id.to_string(), image_lightness(img).unwrap()))
        .chain([("o".to_string(), 50.0)])
        .collect();
    let candidates = candidate_positives(&records, &MiningThresholds::default()).unwrap();
    assert!(candidates.iter().all(|c| c.id_a != "o" && c.id_b != "o"));
    let pairs = select_hard_positives(&candidates, &lightness, 1).unwrap();
    assert_eq!((pairs[0].anchor_id.as_str(), pairs[0].positive_id.as_str()), ("n0", "n2"));

    let cfg = ToyDescriptorConfig::default();
    let imgs: Vec<(String, _)> = ["n0", "n1", "n2", "o"]
        .iter()
        .zip(nights.iter().chain([&day]))
        .map(|(id, img)| (id.to_string(), img.clone()))
        .collect();
    let pool = DescriptorSet::from_descriptors(
        cfg.dim(),
        imgs.iter().map(|(id, img)| extract_toy_descriptor(id, img, &cfg).unwrap()),
    )
    .unwrap();
    let clusters: HashMap<String, String> = records.iter().map(|r| (r.id.clone(), r.cluster.clone())).collect();
    let sel = mine_hard_negatives(pool.get("n0").unwrap(), &pool, &clusters, 3).unwrap();
    assert_eq!(sel.ids, vec!["o"]);
    assert!(sel.short);
}
