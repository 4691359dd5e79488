//! System-spec files, the binary grid-field format and CSV formatting.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hyperbolic::{HyperbolicSystem, Symbol};
use crate::linalg::{C64, CMat};
use crate::lopatinskii::BoundaryOperator;
use crate::models::{self, Preset};

/// Parsed contents of a system-spec file.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub name: String,
    pub d: usize,
    pub n: usize,
    pub mu: usize,
    /// `A^0..A^d` for matrix systems, or just `A^d` when `symbol` is set.
    pub matrices: Vec<CMat>,
    pub b: Option<CMat>,
    pub symbol: Option<String>,
    pub boundary_symbol: Option<(String, Vec<f64>)>,
}

fn perr(source: &str, field: &str, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        path: source.to_string(),
        message: format!("{field}: {message}"),
    }
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, source: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| perr(source, key, "missing field"))
}

fn as_count(v: &Value, field: &str, source: &str) -> Result<usize> {
    v.as_u64()
        .filter(|&x| x > 0)
        .map(|x| x as usize)
        .ok_or_else(|| perr(source, field, "expected a positive integer"))
}

fn finite_number(v: &Value, field: &str, source: &str) -> Result<f64> {
    // serde_json never yields NaN or infinity from text, but keep the guard
    // for values built in memory.
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| perr(source, field, "expected a finite number"))
}

fn parse_matrix(v: &Value, rows: usize, cols: usize, field: &str, source: &str) -> Result<CMat> {
    let r = v
        .as_array()
        .ok_or_else(|| perr(source, field, "expected an array of rows"))?;
    if r.len() != rows {
        return Err(perr(source, field, format!("expected {rows} rows, found {}", r.len())));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in r.iter().enumerate() {
        let rf = format!("{field}[{i}]");
        let entries = row
            .as_array()
            .ok_or_else(|| perr(source, &rf, "expected an array of [re, im] pairs"))?;
        if entries.len() != cols {
            return Err(perr(source, &rf, format!("expected {cols} entries, found {}", entries.len())));
        }
        for (j, e) in entries.iter().enumerate() {
            let ef = format!("{rf}[{j}]");
            let pair = e
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| perr(source, &ef, "expected an [re, im] pair"))?;
            let re = finite_number(&pair[0], &format!("{ef}[0]"), source)?;
            let im = finite_number(&pair[1], &format!("{ef}[1]"), source)?;
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

fn matrix_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

/// Parses a system-spec JSON document. `source` names the input in errors.
pub fn parse_spec(text: &str, source: &str) -> Result<SystemSpec> {
    let root: Value = serde_json::from_str(text).map_err(|e| perr(source, "<document>", e))?;
    let obj = root
        .as_object()
        .ok_or_else(|| perr(source, "<document>", "expected a JSON object"))?;
    let name = get(obj, "name", source)?
        .as_str()
        .ok_or_else(|| perr(source, "name", "expected a string"))?
        .to_string();
    let d = as_count(get(obj, "d", source)?, "d", source)?;
    let n = as_count(get(obj, "N", source)?, "N", source)?;
    let mu = as_count(get(obj, "mu", source)?, "mu", source)?;
    if mu > n {
        return Err(perr(source, "mu", format!("mu = {mu} exceeds N = {n}")));
    }
    let symbol = match obj.get("symbol") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_str()
                .ok_or_else(|| perr(source, "symbol", "expected a tag string"))?
                .to_string(),
        ),
    };
    let a = get(obj, "A", source)?
        .as_array()
        .ok_or_else(|| perr(source, "A", "expected an array of matrices"))?;
    let want = if symbol.is_some() { 1 } else { d + 1 };
    if a.len() != want {
        return Err(perr(
            source,
            "A",
            format!("expected {want} matrices, found {}", a.len()),
        ));
    }
    let matrices = a
        .iter()
        .enumerate()
        .map(|(k, m)| parse_matrix(m, n, n, &format!("A[{k}]"), source))
        .collect::<Result<Vec<_>>>()?;
    let b = match obj.get("B") {
        None | Some(Value::Null) => None,
        Some(v) => Some(parse_matrix(v, mu, n, "B", source)?),
    };
    let boundary_symbol = match obj.get("boundary_symbol") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let o = v
                .as_object()
                .ok_or_else(|| perr(source, "boundary_symbol", "expected an object"))?;
            let tag = get(o, "tag", source)
                .map_err(|_| perr(source, "boundary_symbol.tag", "missing field"))?
                .as_str()
                .ok_or_else(|| perr(source, "boundary_symbol.tag", "expected a string"))?
                .to_string();
            let params = match o.get("params") {
                None => Vec::new(),
                Some(p) => p
                    .as_array()
                    .ok_or_else(|| perr(source, "boundary_symbol.params", "expected an array"))?
                    .iter()
                    .enumerate()
                    .map(|(k, x)| finite_number(x, &format!("boundary_symbol.params[{k}]"), source))
                    .collect::<Result<Vec<_>>>()?,
            };
            Some((tag, params))
        }
    };
    match (&b, &boundary_symbol) {
        (None, None) => return Err(perr(source, "B", "missing field (or boundary_symbol)")),
        (Some(_), Some(_)) => return Err(perr(source, "B", "give either B or boundary_symbol, not both")),
        _ => {}
    }
    Ok(SystemSpec {
        name,
        d,
        n,
        mu,
        matrices,
        b,
        symbol,
        boundary_symbol,
    })
}

impl SystemSpec {
    /// Builds the system and boundary operator; `source` names the input in errors.
    pub fn build(&self, source: &str, tol: &Tolerances) -> Result<(HyperbolicSystem, BoundaryOperator)> {
        let system = match &self.symbol {
            Some(tag) => {
                let s = models::custom_symbol_by_tag(tag)
                    .ok_or_else(|| perr(source, "symbol", format!("unknown symbol tag '{tag}'")))?;
                HyperbolicSystem::custom(self.name.clone(), self.d, self.matrices[0].clone(), s)
                    .map_err(|e| perr(source, "A", e))?
            }
            None => HyperbolicSystem::linear(self.name.clone(), self.matrices.clone(), tol)
                .map_err(|e| perr(source, "A", e))?,
        };
        let b = match (&self.b, &self.boundary_symbol) {
            (Some(b), _) => BoundaryOperator::constant(b.clone(), tol).map_err(|e| perr(source, "B", e))?,
            (None, Some((tag, params))) => {
                let s = models::boundary_symbol_by_tag(tag, params).map_err(|e| perr(source, "boundary_symbol", e))?;
                if s.mu() != self.mu || s.n() != self.n {
                    return Err(perr(source, "boundary_symbol", "shape does not match mu x N"));
                }
                BoundaryOperator::Symbol(s)
            }
            (None, None) => unreachable!("checked while parsing"),
        };
        Ok((system, b))
    }
}

/// Spec document for a system and boundary operator.
pub fn export_spec(system: &HyperbolicSystem, b: &BoundaryOperator, boundary_params: &[f64]) -> String {
    let mut obj = Map::new();
    obj.insert("name".into(), json!(system.name));
    obj.insert("d".into(), json!(system.d));
    obj.insert("N".into(), json!(system.n));
    obj.insert("mu".into(), json!(b.mu()));
    match &system.symbol {
        Symbol::Linear(a) => {
            obj.insert("A".into(), Value::Array(a.iter().map(matrix_json).collect()));
        }
        Symbol::Custom(s) => {
            obj.insert("symbol".into(), json!(s.tag()));
            obj.insert("A".into(), Value::Array(vec![matrix_json(system.ad())]));
        }
    }
    match b {
        BoundaryOperator::Constant(m) => {
            obj.insert("B".into(), matrix_json(m));
        }
        BoundaryOperator::Symbol(s) => {
            obj.insert("boundary_symbol".into(), json!({"tag": s.tag(), "params": boundary_params}));
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("json serialization");
    text.push('\n');
    text
}

/// Spec document for a preset (oblique presets carry their `b` vector).
pub fn export_preset(preset: &Preset, boundary_params: &[f64]) -> String {
    export_spec(&preset.system, &preset.b, boundary_params)
}

pub fn read_spec_file(path: &Path) -> Result<SystemSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_spec(&text, &path.display().to_string())
}

pub const FIELD_MAGIC: [u8; 8] = *b"HYPBCGF1";
const MAX_DIMS: usize = 8;
const MAX_COMPONENTS: usize = 1 << 12;
const MAX_POINTS: u64 = 1 << 32;

/// Complex vector field on a uniform tensor grid, component index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub components: usize,
    pub dims: Vec<usize>,
    pub spacings: Vec<f64>,
    pub gamma: f64,
    pub data: Vec<C64>,
}

impl GridField {
    pub fn zeros(components: usize, dims: Vec<usize>, spacings: Vec<f64>, gamma: f64) -> Self {
        let len = components * dims.iter().product::<usize>();
        Self {
            components,
            dims,
            spacings,
            gamma,
            data: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn points(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flat point index of a multi-index.
    pub fn point_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn get(&self, point: usize, comp: usize) -> C64 {
        self.data[point * self.components + comp]
    }

    pub fn set(&mut self, point: usize, comp: usize, v: C64) {
        self.data[point * self.components + comp] = v;
    }

    /// `sum |v|^2` times the cell volume.
    pub fn l2_norm_sqr(&self) -> f64 {
        let cell: f64 = self.spacings.iter().product();
        cell * self.data.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 16 * self.dims.len() + 16 * self.data.len());
        out.extend_from_slice(&FIELD_MAGIC);
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.components as u32).to_le_bytes());
        for &n in &self.dims {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for &h in &self.spacings {
            out.extend_from_slice(&h.to_le_bytes());
        }
        out.extend_from_slice(&self.gamma.to_le_bytes());
        for z in &self.data {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    /// Decodes and validates a grid-field buffer.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::Parse {
            path: "<grid field>".into(),
            message: m,
        };
        let mut cur = Cursor { bytes, pos: 0 };
        let magic = cur.take(8).ok_or_else(|| bad("truncated header".into()))?;
        if magic != FIELD_MAGIC {
            return Err(bad("bad magic".into()));
        }
        let ndims = cur.u32().ok_or_else(|| bad("truncated header".into()))? as usize;
        let components = cur.u32().ok_or_else(|| bad("truncated header".into()))? as usize;
        if ndims == 0 || ndims > MAX_DIMS {
            return Err(bad(format!("dimension count {ndims} outside 1..={MAX_DIMS}")));
        }
        if components == 0 || components > MAX_COMPONENTS {
            return Err(bad(format!("component count {components} outside 1..={MAX_COMPONENTS}")));
        }
        let mut dims = Vec::with_capacity(ndims);
        let mut total: u64 = components as u64;
        for k in 0..ndims {
            let n = cur.u64().ok_or_else(|| bad("truncated dims".into()))?;
            if n == 0 {
                return Err(bad(format!("dims[{k}] is zero")));
            }
            total = total
                .checked_mul(n)
                .filter(|&t| t <= MAX_POINTS)
                .ok_or_else(|| bad("grid too large".into()))?;
            dims.push(n as usize);
        }
        let mut spacings = Vec::with_capacity(ndims);
        for k in 0..ndims {
            let h = cur.f64().ok_or_else(|| bad("truncated spacings".into()))?;
            if !(h.is_finite() && h > 0.0) {
                return Err(bad(format!("spacings[{k}] must be finite and positive")));
            }
            spacings.push(h);
        }
        let gamma = cur.f64().ok_or_else(|| bad("truncated header".into()))?;
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(bad("gamma must be finite and non-negative".into()));
        }
        let payload = bytes.len() - cur.pos;
        if payload as u64 != total * 16 {
            return Err(bad(format!(
                "payload has {payload} bytes, header implies {}",
                total * 16
            )));
        }
        let mut data = Vec::with_capacity(total as usize);
        for _ in 0..total {
            let re = cur.f64().expect("length checked");
            let im = cur.f64().expect("length checked");
            if !re.is_finite() || !im.is_finite() {
                return Err(bad("non-finite payload value".into()));
            }
            data.push(C64::new(re, im));
        }
        Ok(Self {
            components,
            dims,
            spacings,
            gamma,
            data,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::decode(&bytes).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }
    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }
    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}

/// Number formatting for CSV output: 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a CSV table with `\n` line endings.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{maxwell, wave_neumann, wave_oblique};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn spec_roundtrip_linear() {
        let p = maxwell(1.0, 1.0).unwrap();
        let text = export_preset(&p, &[]);
        let spec = parse_spec(&text, "mem").unwrap();
        assert_eq!(spec.d, 3);
        assert_eq!(spec.mu, 2);
        let (s, b) = spec.build("mem", &tol()).unwrap();
        assert_eq!(s.matrices().unwrap(), p.system.matrices().unwrap());
        assert_eq!(b.as_constant(), p.b.as_constant());
    }

    #[test]
    fn spec_roundtrip_custom() {
        let p = wave_oblique(2, &[1.0]).unwrap();
        let text = export_preset(&p, &[1.0]);
        let spec = parse_spec(&text, "mem").unwrap();
        assert_eq!(spec.symbol.as_deref(), Some("wave"));
        let (_, b) = spec.build("mem", &tol()).unwrap();
        assert_eq!(b.tag(), Some("oblique"));
        let w = wave_neumann(3).unwrap();
        let spec = parse_spec(&export_preset(&w, &[]), "mem").unwrap();
        assert_eq!(spec.d, 3);
    }

    #[test]
    fn spec_errors_name_the_field() {
        let p = maxwell(1.0, 1.0).unwrap();
        let mut v: Value = serde_json::from_str(&export_preset(&p, &[])).unwrap();
        v["A"][2][1] = json!([[0.0, 0.0]]);
        let err = parse_spec(&v.to_string(), "m.json").unwrap_err();
        match err {
            Error::Parse { path, message } => {
                assert_eq!(path, "m.json");
                assert!(message.starts_with("A[2][1]"), "{message}");
            }
            other => panic!("{other}"),
        }
        assert!(parse_spec("{\"name\": 1}", "x").is_err());
        assert!(parse_spec("not json", "x").is_err());
    }

    #[test]
    fn field_roundtrip_and_rejects() {
        let mut f = GridField::zeros(2, vec![3, 4], vec![0.5, 0.25], 1.5);
        f.set(5, 1, C64::new(1.0, -2.0));
        let bytes = f.encode();
        assert_eq!(GridField::decode(&bytes).unwrap(), f);
        assert!(GridField::decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(GridField::decode(&bad).is_err());
        let mut nan = bytes.clone();
        let off = bytes.len() - 8;
        nan[off..].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(GridField::decode(&nan).is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
    }
}
