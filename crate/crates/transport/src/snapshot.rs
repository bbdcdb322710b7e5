//! Plain-text snapshots of composite maps, so a map can be built once and
//! reused across estimator runs. Layer Gram accumulators are recomputed on
//! load; they are a pure function of the stored cores and grid.
//!
//! ```text
//! dirtsnapshot v1
//! dim <d>
//! reference <std> <lo> <hi>
//! bounds
//! <a_0> <b_0>
//! ...
//! betas <beta_0> ... <beta_L>
//! grid_nodes <n>
//! layer <i> eps <floor>
//! <tt snapshot lines, ending with its own `end`>
//! ...
//! endmap
//! ```

use ttrel_core::{GridSpec, TtTensor};

use crate::dirt::{DirtBuildReport, DirtMap};
use crate::sirt::SirtLayer;
use crate::{ReferenceDensity, TemperingSchedule, TransportError};

impl DirtMap {
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        s.push_str("dirtsnapshot v1\n");
        let _ = writeln!(s, "dim {}", self.dim());
        let r = self.reference();
        let _ = writeln!(s, "reference {:?} {:?} {:?}", r.std_dev, r.lo, r.hi);
        s.push_str("bounds\n");
        for &(a, b) in self.bounds() {
            let _ = writeln!(s, "{a:?} {b:?}");
        }
        s.push_str("betas");
        for b in self.schedule().betas() {
            let _ = write!(s, " {b:?}");
        }
        s.push('\n');
        let grid_nodes = self
            .layers()
            .first()
            .map(|l| l.grid().dims()[0])
            .unwrap_or(2);
        let _ = writeln!(s, "grid_nodes {grid_nodes}");
        for (i, layer) in self.layers().iter().enumerate() {
            let _ = writeln!(s, "layer {i} eps {:?} eta {:?}", layer.floor_eps(), layer.defensive_eta());
            s.push_str(&layer.tt().to_text());
        }
        s.push_str("endmap\n");
        s
    }

    pub fn from_text(text: &str) -> Result<Self, TransportError> {
        let mut lines = text.lines();
        let mut next = |what: &str| -> Result<&str, TransportError> {
            lines
                .next()
                .ok_or_else(|| TransportError::Parse(format!("unexpected end, wanted {what}")))
        };
        if next("header")?.trim() != "dirtsnapshot v1" {
            return Err(TransportError::Parse("not a v1 dirt snapshot".into()));
        }
        let dim: usize = field(next("dim")?, "dim")?;
        let ref_line = next("reference")?;
        let parts: Vec<&str> = ref_line.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "reference" {
            return Err(TransportError::Parse("bad reference line".into()));
        }
        let reference = ReferenceDensity::new(
            parse_f64(parts[1])?,
            parse_f64(parts[2])?,
            parse_f64(parts[3])?,
        )?;
        if next("bounds")?.trim() != "bounds" {
            return Err(TransportError::Parse("missing bounds".into()));
        }
        let mut bounds = Vec::with_capacity(dim);
        for _ in 0..dim {
            let line = next("bound pair")?;
            let mut it = line.split_whitespace();
            let a = parse_f64(it.next().ok_or_else(|| TransportError::Parse("bad bound".into()))?)?;
            let b = parse_f64(it.next().ok_or_else(|| TransportError::Parse("bad bound".into()))?)?;
            bounds.push((a, b));
        }
        let beta_line = next("betas")?;
        let mut it = beta_line.split_whitespace();
        if it.next() != Some("betas") {
            return Err(TransportError::Parse("missing betas".into()));
        }
        let betas: Result<Vec<f64>, _> = it.map(parse_f64).collect();
        let schedule = TemperingSchedule::new(betas?)?;
        let grid_nodes: usize = field(next("grid_nodes")?, "grid_nodes")?;
        let grid = GridSpec::uniform(&vec![(reference.lo, reference.hi); dim], grid_nodes)?;

        let mut layers = Vec::new();
        loop {
            let line = next("layer or endmap")?;
            if line.trim() == "endmap" {
                break;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 6 || parts[0] != "layer" || parts[2] != "eps" || parts[4] != "eta" {
                return Err(TransportError::Parse(format!("bad layer line {line:?}")));
            }
            let eps = parse_f64(parts[3])?;
            let eta = parse_f64(parts[5])?;
            let mut tt_text = String::new();
            loop {
                let tl = next("tt snapshot line")?;
                tt_text.push_str(tl);
                tt_text.push('\n');
                if tl.trim() == "end" {
                    break;
                }
            }
            let tt = TtTensor::from_text(&tt_text)?;
            layers.push(SirtLayer::from_tt_with_floors(
                tt,
                grid.clone(),
                eps,
                eta,
                Some(&reference),
            )?);
        }
        if layers.len() != schedule.num_layers() {
            return Err(TransportError::Parse(format!(
                "{} layers for a {}-entry schedule",
                layers.len(),
                schedule.num_layers()
            )));
        }
        Ok(DirtMap::assemble(
            layers,
            schedule,
            reference,
            bounds,
            DirtBuildReport { per_layer: Vec::new(), target_evals: 0 },
        ))
    }
}

fn field<T: std::str::FromStr>(line: &str, key: &str) -> Result<T, TransportError> {
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(TransportError::Parse(format!("expected {key} line, got {line:?}")));
    }
    it.next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| TransportError::Parse(format!("bad {key} value in {line:?}")))
}

fn parse_f64(s: &str) -> Result<f64, TransportError> {
    s.parse::<f64>()
        .map_err(|e| TransportError::Parse(format!("bad float {s:?}: {e}")))
}
