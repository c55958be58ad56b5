//! Day/night retrieval on a synthetic corpus with each normalisation.
//!
//! ```text
//! cargo run --release --example day_night -- [scenes] [seed]
//! ```

use lumen::descriptor::{extract_toy_descriptor, DescriptorSet, ToyDescriptorConfig};
use lumen::fixtures::{day_night_corpus, NightConfig, SceneConfig};
use lumen::photometric::{normalize_image, ClaheConfig, NormalisationMethod};
use lumen::retrieval::mean_ap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scenes: usize = args.next().map_or(Ok(40), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(0), |a| a.parse())?;

    let start = std::time::Instant::now();
    let corpus = day_night_corpus(scenes, &SceneConfig::default(), &NightConfig::default(), seed)?;
    let protocol = corpus.protocol();
    let cfg = ToyDescriptorConfig::default();
    for method in [
        NormalisationMethod::None,
        NormalisationMethod::HistEq,
        NormalisationMethod::Clahe(ClaheConfig::default()),
    ] {
        let descs = corpus
            .images
            .iter()
            .map(|(id, img)| extract_toy_descriptor(id, &normalize_image(img, &method)?, &cfg))
            .collect::<lumen::Result<Vec<_>>>()?;
        let set = DescriptorSet::from_descriptors(cfg.dim(), descs)?;
        let report = mean_ap(&protocol, &set, &set)?;
        println!("{:>8}  mAP {:5.1}", method.name(), report.map);
    }
    println!("{} scenes in {:.2?}", scenes, start.elapsed());
    Ok(())
}
