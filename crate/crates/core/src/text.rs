//! Plain-text snapshot format for TT tensors.
//!
//! Layout (whitespace separated, `#` starts a comment line):
//!
//! ```text
//! ttsnapshot v1
//! dims  n_1 ... n_d
//! ranks r_0 ... r_d
//! core 0
//! <r_0 * n_1 * r_1 values, row-major in (left, node, right) order>
//! core 1
//! ...
//! end
//! ```
//!
//! Values are written in shortest round-trip decimal form, so writing and
//! re-reading a snapshot reproduces the tensor bit for bit.

use std::fmt::Write as _;

use crate::{TtCore, TtError, TtTensor};

impl TtTensor {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("ttsnapshot v1\n");
        s.push_str("dims ");
        for (i, n) in self.dims().iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{n}");
        }
        s.push('\n');
        s.push_str("ranks ");
        for (i, r) in self.ranks().iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{r}");
        }
        s.push('\n');
        for (k, core) in self.cores().iter().enumerate() {
            let _ = writeln!(s, "core {k}");
            for (j, v) in core.data().iter().enumerate() {
                if j > 0 {
                    s.push(if j % 8 == 0 { '\n' } else { ' ' });
                }
                let _ = write!(s, "{v:?}");
            }
            s.push('\n');
        }
        s.push_str("end\n");
        s
    }

    pub fn from_text(text: &str) -> Result<Self, TtError> {
        let mut tokens = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(|l| l.split_whitespace());
        let mut expect = |what: &str| -> Result<&str, TtError> {
            tokens
                .next()
                .ok_or_else(|| TtError::Parse(format!("unexpected end of snapshot, wanted {what}")))
        };
        if expect("header")? != "ttsnapshot" || expect("version")? != "v1" {
            return Err(TtError::Parse("not a v1 tt snapshot".into()));
        }
        if expect("dims keyword")? != "dims" {
            return Err(TtError::Parse("missing dims".into()));
        }
        let mut dims = Vec::new();
        let mut tok = expect("dims values")?;
        while tok != "ranks" {
            dims.push(
                tok.parse::<usize>()
                    .map_err(|e| TtError::Parse(format!("bad dim {tok:?}: {e}")))?,
            );
            tok = expect("dims values")?;
        }
        let mut ranks = Vec::new();
        let mut tok = expect("ranks values")?;
        while tok != "core" {
            ranks.push(
                tok.parse::<usize>()
                    .map_err(|e| TtError::Parse(format!("bad rank {tok:?}: {e}")))?,
            );
            tok = expect("ranks values")?;
        }
        if ranks.len() != dims.len() + 1 {
            return Err(TtError::Parse(format!(
                "{} ranks for {} dims",
                ranks.len(),
                dims.len()
            )));
        }
        let mut cores = Vec::with_capacity(dims.len());
        for k in 0..dims.len() {
            // `core` keyword consumed by the previous loop or iteration
            let id = expect("core id")?;
            if id != k.to_string() {
                return Err(TtError::Parse(format!("expected core {k}, found {id:?}")));
            }
            let (rl, n, rr) = (ranks[k], dims[k], ranks[k + 1]);
            let len = rl * n * rr;
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                let v = expect("core value")?;
                data.push(
                    v.parse::<f64>()
                        .map_err(|e| TtError::Parse(format!("bad value {v:?}: {e}")))?,
                );
            }
            cores.push(TtCore::new(rl, n, rr, data)?);
            let next = expect("core or end")?;
            if k + 1 < dims.len() {
                if next != "core" {
                    return Err(TtError::Parse(format!("expected next core, found {next:?}")));
                }
            } else if next != "end" {
                return Err(TtError::Parse(format!("expected end, found {next:?}")));
            }
        }
        TtTensor::new(cores)
    }
}
