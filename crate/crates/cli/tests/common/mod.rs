#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lumen::descriptor::{write_descriptors, Descriptor, DescriptorSet};
use lumen::fixtures::{night_version, synthetic_scene, NightConfig, SceneConfig};
use lumen::raster::write_image;
use lumen::rng::Rng;

pub fn lumen(args: &[&str]) -> Output {
    lumen_with_threads(args, None)
}

pub fn lumen_with_threads(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lumen"));
    cmd.args(args).env_remove("LUMEN_THREADS");
    if let Some(n) = threads {
        cmd.env("LUMEN_THREADS", n.to_string());
    }
    cmd.output().expect("binary runs")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

pub fn small_scene() -> SceneConfig {
    SceneConfig {
        width: 96,
        height: 64,
        shared_shapes: 6,
        shapes: 3,
        shading: 0.1,
    }
}

/// Tokyo-style fixture: `locations x 3 directions x {D, S, N}` images and
/// the metadata CSV. Returns (meta csv, image dir).
pub fn tokyo_fixture(root: &Path, locations: u32) -> (PathBuf, PathBuf) {
    let images = root.join("images");
    std::fs::create_dir_all(&images).unwrap();
    let mut csv = String::from("image_id,location,direction,condition\n");
    let scene = small_scene();
    for loc in 0..locations {
        for dir in 0..3u32 {
            let seed = u64::from(loc * 3 + dir) + 1;
            let day = synthetic_scene(&scene, 7, seed);
            let sunset = night_version(&day, &NightConfig { alpha: 0.5, ..NightConfig::default() }, seed).unwrap();
            let night = night_version(&day, &NightConfig::default(), seed + 1000).unwrap();
            for (cond, img) in [("D", day), ("S", sunset), ("N", night)] {
                let id = format!("l{loc:02}_d{dir}_{cond}");
                write_image(images.join(format!("{id}.png")), &img).unwrap();
                csv.push_str(&format!("{id},{loc},{dir},{cond}\n"));
            }
        }
    }
    let meta = root.join("meta.csv");
    std::fs::write(&meta, csv).unwrap();
    (meta, images)
}

/// SfM model with `clusters` clusters of `per_cluster` cameras looking
/// roughly the same way, with trimmed lightness stored per image.
pub fn model_json(clusters: usize, per_cluster: usize, seed: u64) -> String {
    let mut rng = Rng::new(seed);
    let mut images = Vec::new();
    for c in 0..clusters {
        let base = [rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), 0.0];
        for i in 0..per_cluster {
            let centre = [
                base[0] + rng.uniform(-1.0, 1.0),
                base[1] + rng.uniform(-1.0, 1.0),
                rng.uniform(-0.5, 0.5),
            ];
            let tilt: f64 = rng.uniform(-0.5, 0.5);
            let axis = [tilt.sin(), 0.0, tilt.cos()];
            let points: Vec<String> = (0..8)
                .map(|_| {
                    format!(
                        "[{},{},{}]",
                        centre[0] + rng.uniform(-2.0, 2.0),
                        centre[1] + rng.uniform(-2.0, 2.0),
                        centre[2] + 5.0 + rng.uniform(-2.0, 2.0)
                    )
                })
                .collect();
            images.push(format!(
                r#"{{"id":"c{c}_i{i:02}","cluster":{c},"camera_center":[{},{},{}],"optical_axis":[{},{},{}],"points":[{}],"trimmed_lightness":{}}}"#,
                centre[0],
                centre[1],
                centre[2],
                axis[0],
                axis[1],
                axis[2],
                points.join(","),
                rng.uniform(5.0, 95.0)
            ));
        }
    }
    format!("{{\"images\":[{}]}}", images.join(","))
}

/// Random unit descriptors, one per id.
pub fn random_descriptors(ids: &[String], dim: usize, seed: u64) -> DescriptorSet {
    let mut rng = Rng::new(seed);
    let descs = ids.iter().map(|id| {
        let v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        Descriptor::new(id.clone(), v.iter().map(|x| (x / n) as f32).collect()).unwrap()
    });
    DescriptorSet::from_descriptors(dim, descs).unwrap()
}

pub fn write_random_descriptors(path: &Path, ids: &[String], dim: usize, seed: u64) {
    write_descriptors(&random_descriptors(ids, dim, seed), path).unwrap();
}

pub fn model_ids(clusters: usize, per_cluster: usize) -> Vec<String> {
    (0..clusters)
        .flat_map(|c| (0..per_cluster).map(move |i| format!("c{c}_i{i:02}")))
        .collect()
}

/// Config evaluating none/histeq/clahe toy methods on a Tokyo fixture.
pub fn tokyo_config(root: &Path, meta: &Path, images: &Path) -> PathBuf {
    let cfg = format!(
        r#"seed = 3
output_dir = "out"

[[dataset]]
name = "Tokyo"
tokyo_meta = "{}"
images = "{}"

[[method]]
name = "none"

[[method]]
name = "histeq"
normalisation = {{ method = "histeq" }}

[[method]]
name = "clahe"
normalisation = {{ method = "clahe", clip_limit = 4.0, grid_cols = 4, grid_rows = 4 }}
"#,
        p(meta),
        p(images)
    );
    let path = root.join("eval.toml");
    std::fs::write(&path, cfg).unwrap();
    path
}
