//! Text formats. Data files open with `# polyharm v1 <type> n=<n> key=value...`
//! followed by whitespace-separated columns in `%.16e`, which round-trips
//! every `f64` exactly. Reports are `key=value` lines under `[section]`s.

use crate::equivalence::{Expr, FieldData, FixtureKind, Growth, SolutionFixture};
use crate::error::{Error, Result};
use crate::field::{CartesianField, Grid};
use crate::radial::RadialProfile;
use std::fmt::Write as _;
use std::path::Path;

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(kind: &str, n: usize, extra: &[(&str, String)]) -> String {
    let mut line = format!("# polyharm v1 {kind} n={n}");
    for (k, v) in extra {
        let _ = write!(line, " {k}={v}");
    }
    line
}

/// Columnar data with a header and a `# columns` line.
pub fn columns_to_string(kind: &str, n: usize, extra: &[(&str, String)], names: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header(kind, n, extra);
    out.push('\n');
    let _ = writeln!(out, "# columns {}", names.join(" "));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn opt_float(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

pub fn fixture_to_string(fix: &SolutionFixture) -> String {
    let n = fix.n();
    let g = fix.growth;
    let mut extra: Vec<(&str, String)> = Vec::new();
    match &fix.fields[0] {
        FieldData::Cartesian(f) => {
            extra.push(("layout", "cartesian".into()));
            extra.push(("half_width", f.grid().half_width().to_string()));
            extra.push(("points", f.grid().points().to_string()));
        }
        FieldData::Radial(p) => {
            extra.push(("layout", "radial".into()));
            extra.push(("points", p.len().to_string()));
        }
    }
    extra.extend([
        ("fields", fix.count().to_string()),
        ("alpha", fix.alpha.to_string()),
        ("kind", fix.kind.name().to_string()),
        ("p", g.p.to_string()),
        ("delta", g.delta.to_string()),
        ("c_delta", g.c_delta.to_string()),
        ("c", opt_float(g.c)),
    ]);
    let mut out = header("fixture", n, &extra);
    out.push('\n');
    for (i, e) in fix.rhs.iter().enumerate() {
        let _ = writeln!(out, "# rhs{} = {e}", i + 1);
    }
    let mut names: Vec<String> = Vec::new();
    match &fix.fields[0] {
        FieldData::Cartesian(_) => names.extend((1..=n).map(|d| format!("x{d}"))),
        FieldData::Radial(_) => names.push("r".into()),
    }
    names.extend((1..=fix.count()).map(|i| format!("u{i}")));
    let _ = writeln!(out, "# columns {}", names.join(" "));
    let len = fix.fields[0].values().len();
    let mut x = vec![0.0; n];
    for node in 0..len {
        let mut cells: Vec<String> = Vec::with_capacity(names.len());
        match &fix.fields[0] {
            FieldData::Cartesian(f) => {
                f.grid().position(node, &mut x);
                cells.extend(x.iter().map(|v| format_float(*v)));
            }
            FieldData::Radial(p) => cells.push(format_float(p.radii()[node])),
        }
        cells.extend(fix.fields.iter().map(|f| format_float(f.values()[node])));
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

struct Header {
    kind: String,
    pairs: Vec<(String, String)>,
}

impl Header {
    fn parse(line: &str) -> Result<Self> {
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("#") || tokens.next() != Some("polyharm") || tokens.next() != Some("v1") {
            return Err(Error::Parse(format!("not a polyharm v1 header: `{line}`")));
        }
        let kind = tokens
            .next()
            .ok_or_else(|| Error::Parse("header lacks a type".into()))?
            .to_string();
        let pairs = tokens
            .map(|t| {
                t.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| Error::Parse(format!("malformed header entry `{t}`")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { kind, pairs })
    }

    fn get(&self, key: &str) -> Result<&str> {
        self.pairs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Parse(format!("header lacks `{key}`")))
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`")))
    }
}

pub fn fixture_from_str(text: &str) -> Result<SolutionFixture> {
    let mut lines = text.lines();
    let head = Header::parse(lines.next().unwrap_or(""))?;
    if head.kind != "fixture" {
        return Err(Error::Parse(format!("expected a fixture file, found `{}`", head.kind)));
    }
    let n: usize = head.num("n")?;
    let count: usize = head.num("fields")?;
    let alpha: f64 = head.num("alpha")?;
    let kind = FixtureKind::from_name(head.get("kind")?)?;
    let growth = Growth {
        p: head.num("p")?,
        delta: head.num("delta")?,
        c_delta: head.num("c_delta")?,
        c: match head.get("c")? {
            "none" => None,
            _ => Some(head.num("c")?),
        },
    };
    let mut rhs = vec![None; count];
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        if let Some(rest) = line.strip_prefix("# rhs") {
            let (idx, expr) = rest
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed rhs line `{line}`")))?;
            let i: usize = idx
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad rhs index in `{line}`")))?;
            if i == 0 || i > count {
                return Err(Error::Parse(format!("rhs index {i} out of range")));
            }
            rhs[i - 1] = Some(Expr::parse(expr.trim())?);
        } else if line.starts_with('#') || line.trim().is_empty() {
            continue;
        } else {
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
    }
    let rhs = rhs
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.ok_or_else(|| Error::Parse(format!("missing rhs{}", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    let points: usize = head.num("points")?;
    let fields = match head.get("layout")? {
        "cartesian" => {
            let grid = Grid::new(n, head.num("half_width")?, points)?;
            check_rows(&rows, grid.len(), n + count)?;
            (0..count)
                .map(|i| {
                    let values = rows.iter().map(|r| r[n + i]).collect();
                    Ok(FieldData::Cartesian(CartesianField::new(grid, values)?))
                })
                .collect::<Result<Vec<_>>>()?
        }
        "radial" => {
            check_rows(&rows, points, 1 + count)?;
            let radii: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            (0..count)
                .map(|i| {
                    let values = rows.iter().map(|r| r[1 + i]).collect();
                    Ok(FieldData::Radial(RadialProfile::new(n, radii.clone(), values)?))
                })
                .collect::<Result<Vec<_>>>()?
        }
        other => return Err(Error::Parse(format!("unknown layout `{other}`"))),
    };
    SolutionFixture::new(fields, rhs, alpha, kind, growth)
}

fn check_rows(rows: &[Vec<f64>], len: usize, width: usize) -> Result<()> {
    if rows.len() != len {
        return Err(Error::Parse(format!("expected {len} rows, found {}", rows.len())));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::Parse(format!("expected {width} columns, found {}", r.len())));
    }
    Ok(())
}

pub fn write_fixture(path: &Path, fix: &SolutionFixture) -> Result<()> {
    write_text(path, &fixture_to_string(fix))
}

pub fn read_fixture(path: &Path) -> Result<SolutionFixture> {
    fixture_from_str(&read_text(path)?)
}

#[derive(Debug, Clone, Default)]
pub struct Section {
    name: String,
    entries: Vec<(String, String)>,
}

impl Section {
    pub fn num(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.entries.push((key.into(), format_float(v)));
        self
    }

    pub fn text(&mut self, key: impl Into<String>, v: impl ToString) -> &mut Self {
        self.entries.push((key.into(), v.to_string()));
        self
    }
}

/// Sectioned `key=value` report.
#[derive(Debug, Clone)]
pub struct Report {
    header: String,
    sections: Vec<Section>,
}

impl Report {
    pub fn new(kind: &str, n: usize, extra: &[(&str, String)]) -> Self {
        Self {
            header: header(kind, n, extra),
            sections: Vec::new(),
        }
    }

    pub fn section(&mut self, name: &str) -> &mut Section {
        if let Some(i) = self.sections.iter().position(|s| s.name == name) {
            return &mut self.sections[i];
        }
        self.sections.push(Section {
            name: name.to_string(),
            entries: Vec::new(),
        });
        self.sections.last_mut().unwrap()
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|s| s.name == section)?
            .entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = self.header.clone();
        out.push('\n');
        for s in &self.sections {
            let _ = writeln!(out, "\n[{}]", s.name);
            for (k, v) in &s.entries {
                let _ = writeln!(out, "{k}={v}");
            }
        }
        out
    }
}
