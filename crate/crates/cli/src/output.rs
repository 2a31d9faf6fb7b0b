//! CSV tables: provenance comments, fixed float formatting, atomic writes
//! and typed readers.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A table ready to be written: leading `#` comments, header, rows and
/// trailing `#` comments.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub preamble: Vec<String>,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
    pub trailer: Vec<String>,
}

impl Table {
    pub fn new(header: &'static [&'static str], provenance: &Provenance) -> Self {
        Table {
            preamble: provenance.lines(),
            header,
            rows: Vec::new(),
            trailer: Vec::new(),
        }
    }

    pub fn push<R: Record>(&mut self, row: &R) {
        debug_assert_eq!(R::HEADER, self.header);
        self.rows.push(row.fields());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.preamble {
            writeln!(out, "# {line}").unwrap();
        }
        writeln!(out, "{}", self.header.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        for line in &self.trailer {
            writeln!(out, "# {line}").unwrap();
        }
        out
    }
}

/// Run identification embedded in every output file. Deliberately free of
/// timestamps, host names and thread counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("kamlab {VERSION}"),
            format!("command {}", self.command),
            match self.seed {
                Some(s) => format!("seed {s}"),
                None => "seed none".to_string(),
            },
            format!("config {}", self.config),
        ]
    }
}

/// Write `contents` to `path` through a temporary file in the same
/// directory, renamed into place once complete.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// A CSV row type with a fixed header.
pub trait Record: DeserializeOwned {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct EllipticRow {
    pub u: f64,
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

impl Record for EllipticRow {
    const HEADER: &'static [&'static str] = &["u", "sn", "cn", "dn"];
    fn fields(&self) -> Vec<String> {
        [self.u, self.sn, self.cn, self.dn].map(fmt_f64).to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct OrbitRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "E_frozen")]
    pub e_frozen: f64,
}

impl Record for OrbitRow {
    const HEADER: &'static [&'static str] = &["t", "x", "y", "E_frozen"];
    fn fields(&self) -> Vec<String> {
        [self.t, self.x, self.y, self.e_frozen]
            .map(fmt_f64)
            .to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub omega: f64,
    /// `Stable`, `Bounded`, `Unbounded`, or `Failed` when too many orbits
    /// failed numerically.
    pub class: String,
    pub frac_close: f64,
    pub frac_drifted: f64,
    pub n_escaped: usize,
    pub n_failed: usize,
    pub seed: u64,
}

impl Record for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "mu",
        "omega",
        "class",
        "frac_close",
        "frac_drifted",
        "n_escaped",
        "n_failed",
        "seed",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.mu),
            fmt_f64(self.omega),
            self.class.clone(),
            fmt_f64(self.frac_close),
            fmt_f64(self.frac_drifted),
            self.n_escaped.to_string(),
            self.n_failed.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct StrobeRow {
    pub ic_index: usize,
    pub k: usize,
    pub x: f64,
    pub y: f64,
}

impl Record for StrobeRow {
    const HEADER: &'static [&'static str] = &["ic_index", "k", "x", "y"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.ic_index.to_string(),
            self.k.to_string(),
            fmt_f64(self.x),
            fmt_f64(self.y),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CrossingRow {
    pub ic_index: usize,
    pub k: usize,
    pub t: f64,
    pub x: f64,
    #[serde(rename = "E_frozen")]
    pub e_frozen: f64,
}

impl Record for CrossingRow {
    const HEADER: &'static [&'static str] = &["ic_index", "k", "t", "x", "E_frozen"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.ic_index.to_string(),
            self.k.to_string(),
            fmt_f64(self.t),
            fmt_f64(self.x),
            fmt_f64(self.e_frozen),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TwistRow {
    pub eps: f64,
    #[serde(rename = "median_dJ")]
    pub median_dj: f64,
    pub n_loops: usize,
}

impl Record for TwistRow {
    const HEADER: &'static [&'static str] = &["eps", "median_dJ", "n_loops"];
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.eps),
            fmt_f64(self.median_dj),
            self.n_loops.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct DriftRow {
    pub omega: f64,
    #[serde(rename = "max_dA")]
    pub max_da: f64,
}

impl Record for DriftRow {
    const HEADER: &'static [&'static str] = &["omega", "max_dA"];
    fn fields(&self) -> Vec<String> {
        vec![fmt_f64(self.omega), fmt_f64(self.max_da)]
    }
}

/// Initial condition row for `--ics` files; `t` defaults to 0.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct IcRow {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub t: f64,
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

/// Parse rows of `text`, skipping `#` comment lines.
pub fn parse_rows<R: DeserializeOwned>(text: &str) -> Result<Vec<R>, csv::Error> {
    reader(text).deserialize().collect()
}

/// The header of `text`, skipping comment lines.
pub fn parse_header(text: &str) -> Result<Vec<String>, csv::Error> {
    Ok(reader(text).headers()?.iter().map(str::to_string).collect())
}

/// Comment lines of `text` without their `# ` prefix.
pub fn comments(text: &str) -> Vec<&str> {
    text.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .map(str::trim_start)
        .collect()
}

pub fn read_rows<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_rows(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prov() -> Provenance {
        Provenance {
            command: "test",
            seed: Some(7),
            config: serde_json::json!({"mu": 0.5}),
        }
    }

    #[test]
    fn render_layout() {
        let mut t = Table::new(DriftRow::HEADER, &prov());
        t.push(&DriftRow {
            omega: 50.0,
            max_da: 0.25,
        });
        t.trailer.push("slope -1".into());
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# kamlab {VERSION}"));
        assert_eq!(lines[2], "# seed 7");
        assert_eq!(lines[3], r#"# config {"mu":0.5}"#);
        assert_eq!(lines[4], "omega,max_dA");
        assert_eq!(lines[5], "5.0000000000000000e1,2.5000000000000000e-1");
        assert_eq!(lines[6], "# slope -1");
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert_eq!(parse_header(&text).unwrap(), ["omega", "max_dA"]);
        assert_eq!(comments(&text).len(), 5);
    }

    #[test]
    fn header_only_table_parses_empty() {
        let t = Table::new(SweepRow::HEADER, &prov());
        let rows: Vec<SweepRow> = parse_rows(&t.render()).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("o.csv");
        write_atomic(&p, b"a\n").unwrap();
        write_atomic(&p, b"b\n").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/o.csv"), b"x").is_err());
    }

    proptest! {
        #[test]
        fn floats_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }

        #[test]
        fn sweep_rows_round_trip(
            mu in -5.0..5.0f64, omega in 1e-4..50.0f64, fc in 0.0..=1.0f64,
            fd in 0.0..=1.0f64, ne in 0usize..1000, nf in 0usize..10, seed in any::<u64>(),
        ) {
            let row = SweepRow {
                mu, omega, class: "Bounded".into(), frac_close: fc, frac_drifted: fd,
                n_escaped: ne, n_failed: nf, seed,
            };
            let mut t = Table::new(SweepRow::HEADER, &prov());
            t.push(&row);
            let back: Vec<SweepRow> = parse_rows(&t.render()).unwrap();
            prop_assert_eq!(back, vec![row]);
        }

        #[test]
        fn crossing_rows_round_trip(
            i in 0usize..100, k in 0usize..1000, tt in 0.0..1e4f64, x in -30.0..30.0f64, e in 0.0..1e3f64,
        ) {
            let row = CrossingRow { ic_index: i, k, t: tt, x, e_frozen: e };
            let mut t = Table::new(CrossingRow::HEADER, &prov());
            t.push(&row);
            let back: Vec<CrossingRow> = parse_rows(&t.render()).unwrap();
            prop_assert_eq!(back, vec![row]);
        }
    }
}
