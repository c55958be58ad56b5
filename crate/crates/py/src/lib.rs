//! Python bindings. Images cross the boundary as raw interleaved `bytes`,
//! descriptors as lists of floats.

use std::collections::HashMap;

use lumen::descriptor::{self as desc, DescriptorSet};
use lumen::photometric::{self, ClaheConfig, NormalisationMethod};
use lumen::raster::{self, RasterImage};
use lumen::retrieval::{self, RetrievalProtocol};
use lumen::whitening::{self as wht, NonMatching, PairList, WhiteningTransform};
use lumen::{exposure, mining};
use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

fn err(e: lumen::Error) -> PyErr {
    match e {
        lumen::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Image", module = "lumen")]
#[derive(Clone)]
pub struct PyImage {
    inner: RasterImage,
}

#[pymethods]
impl PyImage {
    #[new]
    fn new(width: usize, height: usize, channels: usize, data: &[u8]) -> PyResult<Self> {
        RasterImage::from_vec(width, height, channels, data.to_vec())
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        raster::read_image(path).map(|inner| Self { inner }).map_err(err)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        raster::write_image(path, &self.inner).map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    fn data<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.inner.data())
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    /// Trimmed mean of CIE L* in `[0, 100]`.
    fn lightness(&self) -> PyResult<f64> {
        photometric::image_lightness(&self.inner).map_err(err)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{}x{})", self.inner.width(), self.inner.height(), self.inner.channels())
    }
}

fn method(
    name: &str,
    clip_limit: f64,
    grid: (usize, usize),
    window: Option<usize>,
    target_mean: f64,
    reference: Option<&PyImage>,
) -> PyResult<NormalisationMethod> {
    Ok(match name {
        "none" => NormalisationMethod::None,
        "histeq" => NormalisationMethod::HistEq,
        "clahe" => NormalisationMethod::Clahe(ClaheConfig {
            target_window_px: window,
            ..ClaheConfig::with_grid(grid.0, grid.1, clip_limit)
        }),
        "gamma" => NormalisationMethod::Gamma { target_mean },
        "histmatch" => {
            let r = reference.ok_or_else(|| PyValueError::new_err("histmatch needs a reference image"))?;
            let l = raster::rgb_to_lab(&r.inner).map_err(err)?.l;
            NormalisationMethod::HistMatch {
                target: photometric::histogram_of(&l).map_err(err)?,
            }
        }
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    })
}

/// Photometric normalisation of the lightness channel.
#[pyfunction]
#[pyo3(signature = (image, method_name="none", clip_limit=4.0, grid=(8, 8), window=None, target_mean=0.5, reference=None))]
fn normalize(
    image: &PyImage,
    method_name: &str,
    clip_limit: f64,
    grid: (usize, usize),
    window: Option<usize>,
    target_mean: f64,
    reference: Option<&PyImage>,
) -> PyResult<PyImage> {
    let m = method(method_name, clip_limit, grid, window, target_mean, reference)?;
    photometric::normalize_image(&image.inner, &m)
        .map(|inner| PyImage { inner })
        .map_err(err)
}

#[pyfunction]
fn synth_exposure(short: &PyImage, long: &PyImage, alpha: f64) -> PyResult<PyImage> {
    let pair = exposure::ExposurePair::new("pair", short.inner.clone(), long.inner.clone()).map_err(err)?;
    exposure::interpolate_exposure(&pair, alpha)
        .map(|inner| PyImage { inner })
        .map_err(err)
}

#[pyclass(name = "DescriptorSet", module = "lumen")]
#[derive(Clone)]
pub struct PyDescriptorSet {
    inner: DescriptorSet,
}

#[pymethods]
impl PyDescriptorSet {
    #[new]
    fn new(dim: usize) -> Self {
        Self { inner: DescriptorSet::new(dim) }
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        desc::read_descriptors(path).map(|inner| Self { inner }).map_err(err)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        desc::write_descriptors(&self.inner, path).map_err(err)
    }

    fn add(&mut self, id: &str, values: Vec<f32>) -> PyResult<()> {
        let d = desc::Descriptor::new(id, values).map_err(err)?;
        self.inner.push(d).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn ids(&self) -> Vec<String> {
        self.inner.ids().map(str::to_string).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, id: &str) -> bool {
        self.inner.get(id).is_some()
    }

    fn __getitem__(&self, id: &str) -> PyResult<Vec<f32>> {
        self.inner
            .get(id)
            .map(|d| d.values().to_vec())
            .ok_or_else(|| PyKeyError::new_err(id.to_string()))
    }
}

/// Toy gradient-orientation descriptors, one per `(id, image)`.
#[pyfunction]
#[pyo3(signature = (images, cells=4, orientations=8, min_magnitude=desc::DEFAULT_MIN_MAGNITUDE, smoothing=1.0, cell_normalise=true))]
fn toy_descriptors(
    py: Python<'_>,
    images: Vec<(String, PyImage)>,
    cells: usize,
    orientations: usize,
    min_magnitude: f64,
    smoothing: f64,
    cell_normalise: bool,
) -> PyResult<PyDescriptorSet> {
    let cfg = desc::ToyDescriptorConfig {
        grid: cells,
        orientations,
        min_magnitude,
        cell_normalise,
        smoothing,
    };
    py.allow_threads(|| {
        let descs = images
            .iter()
            .map(|(id, img)| desc::extract_toy_descriptor(id, &img.inner, &cfg))
            .collect::<lumen::Result<Vec<_>>>()?;
        DescriptorSet::from_descriptors(cfg.dim(), descs)
    })
    .map(|inner| PyDescriptorSet { inner })
    .map_err(err)
}

#[pyclass(name = "Whitening", module = "lumen")]
#[derive(Clone)]
pub struct PyWhitening {
    inner: WhiteningTransform,
}

#[pymethods]
impl PyWhitening {
    /// Learns from matching pairs; non-matching pairs are either given or
    /// sampled across clusters of the matching graph.
    #[staticmethod]
    #[pyo3(signature = (descriptors, matching, dim, non_matching=None, max_non_matching=wht::DEFAULT_MAX_NON_MATCHING, seed=0))]
    fn learn(
        py: Python<'_>,
        descriptors: &PyDescriptorSet,
        matching: Vec<(String, String)>,
        dim: usize,
        non_matching: Option<Vec<(String, String)>>,
        max_non_matching: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let non_matching = match non_matching {
            Some(pairs) => NonMatching::Explicit { pairs },
            None => NonMatching::CrossCluster {
                max_pairs: max_non_matching,
                seed,
            },
        };
        let pairs = PairList::new(matching, non_matching);
        py.allow_threads(|| wht::learn_whitening(&descriptors.inner, &pairs, dim))
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        wht::read_whitening(path).map(|inner| Self { inner }).map_err(err)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        wht::write_whitening(&self.inner, path).map_err(err)
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    /// Returns the whitened set and the ids whose projection was zero.
    fn apply(&self, descriptors: &PyDescriptorSet) -> PyResult<(PyDescriptorSet, Vec<String>)> {
        let out = wht::apply_whitening_set(&self.inner, &descriptors.inner).map_err(err)?;
        Ok((PyDescriptorSet { inner: out.set }, out.degenerate))
    }
}

#[pyclass(name = "Protocol", module = "lumen")]
#[derive(Clone)]
pub struct PyProtocol {
    inner: RetrievalProtocol,
}

#[pymethods]
impl PyProtocol {
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        retrieval::load_protocol(path).map(|inner| Self { inner }).map_err(err)
    }

    /// Built from a Tokyo-style `image_id,location,direction` CSV.
    #[staticmethod]
    fn tokyo(meta_csv: &str) -> PyResult<Self> {
        let meta = retrieval::load_tokyo_meta(meta_csv).map_err(err)?;
        retrieval::build_tokyo_protocol(&meta)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn database(&self) -> Vec<String> {
        self.inner.database.clone()
    }

    /// `(query_id, positives, junk)` triples.
    fn queries(&self) -> Vec<(String, Vec<String>, Vec<String>)> {
        self.inner
            .queries
            .iter()
            .map(|q| (q.id.clone(), q.positives.clone(), q.junk.clone()))
            .collect()
    }
}

/// mAP report as a dict: `map` (percent), `mean_ap`, `evaluated`,
/// `per_query` and `skipped`.
#[pyfunction]
#[pyo3(signature = (protocol, database, queries=None))]
fn mean_ap<'py>(
    py: Python<'py>,
    protocol: &PyProtocol,
    database: &PyDescriptorSet,
    queries: Option<&PyDescriptorSet>,
) -> PyResult<Bound<'py, PyDict>> {
    let q = queries.unwrap_or(database);
    let r = py
        .allow_threads(|| retrieval::mean_ap(&protocol.inner, &database.inner, &q.inner))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("map", r.map)?;
    d.set_item("mean_ap", r.mean_ap)?;
    d.set_item("evaluated", r.evaluated)?;
    let per_query: HashMap<String, f64> = r.per_query.into_iter().map(|q| (q.query_id, q.ap)).collect();
    d.set_item("per_query", per_query)?;
    d.set_item("skipped", r.skipped)?;
    Ok(d)
}

#[pyfunction]
fn sphere_iou(center_a: [f64; 3], radius_a: f64, center_b: [f64; 3], radius_b: f64) -> PyResult<f64> {
    let a = mining::Ball::new(center_a, radius_a).map_err(err)?;
    let b = mining::Ball::new(center_b, radius_b).map_err(err)?;
    Ok(mining::sphere_iou(&a, &b))
}

/// Hard positive pairs `(anchor, positive, delta_lightness)` from an SfM
/// model JSON. `lightness` overrides values stored in the model.
#[pyfunction]
#[pyo3(signature = (model, lightness=None, k=mining::DEFAULT_POSITIVE_PAIRS, iou=mining::DEFAULT_IOU_THRESHOLD, angle=mining::DEFAULT_ANGLE_THRESHOLD_DEG))]
fn mine_positives(
    py: Python<'_>,
    model: &str,
    lightness: Option<HashMap<String, f64>>,
    k: usize,
    iou: f64,
    angle: f64,
) -> PyResult<Vec<(String, String, f64)>> {
    let records = mining::load_sfm_model(model).map_err(err)?;
    let mut light: HashMap<String, f64> = records
        .iter()
        .filter_map(|r| r.trimmed_lightness.map(|l| (r.id.clone(), l)))
        .collect();
    light.extend(lightness.unwrap_or_default());
    let thr = mining::MiningThresholds { iou, angle_deg: angle };
    let pairs = py
        .allow_threads(|| {
            let candidates = mining::candidate_positives(&records, &thr)?;
            mining::select_hard_positives(&candidates, &light, k)
        })
        .map_err(err)?;
    Ok(pairs
        .into_iter()
        .map(|p| (p.anchor_id, p.positive_id, p.delta_lightness))
        .collect())
}

#[pymodule]
#[pyo3(name = "lumen")]
pub fn lumen_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_class::<PyDescriptorSet>()?;
    m.add_class::<PyWhitening>()?;
    m.add_class::<PyProtocol>()?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(synth_exposure, m)?)?;
    m.add_function(wrap_pyfunction!(toy_descriptors, m)?)?;
    m.add_function(wrap_pyfunction!(mean_ap, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_iou, m)?)?;
    m.add_function(wrap_pyfunction!(mine_positives, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
