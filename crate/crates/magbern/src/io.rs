//! File formats: PBM masks, grid fields, operator triplets and CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use magbern_core::geometry::SetMask;
use magbern_core::landau::{GridField, GridSpec};
use magbern_core::lattice::MagneticOperator;
use magbern_core::Complex64;

use crate::error::{CliError, CliResult};

/// Reads a plain (P1) bitmap. Row `r` becomes `i2 = r`, column `c` becomes
/// `i1 = c`; `1` marks a cell of the set.
pub fn read_pbm(text: &str, h: [f64; 2], origin: [f64; 2], periodic: bool) -> CliResult<SetMask> {
    let mut tokens = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        tokens.extend(line.split_whitespace());
    }
    let mut it = tokens.into_iter();
    if it.next() != Some("P1") {
        return Err(CliError::Format("PBM must start with the magic number P1".into()));
    }
    let mut dim = || -> CliResult<usize> {
        let t = it.next().ok_or_else(|| CliError::Format("PBM header is truncated".into()))?;
        t.parse().map_err(|_| CliError::Format(format!("bad PBM dimension `{t}`")))
    };
    let (w, hgt) = (dim()?, dim()?);
    let mut bits = Vec::with_capacity(w * hgt);
    for t in it {
        // P1 allows digits without separators
        for ch in t.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(CliError::Format(format!("unexpected PBM pixel `{ch}`"))),
            }
        }
    }
    if bits.len() != w * hgt {
        return Err(CliError::Format(format!("PBM holds {} pixels, header says {}", bits.len(), w * hgt)));
    }
    Ok(SetMask::from_bits([w, hgt], h, origin, periodic, bits)?)
}

pub fn read_pbm_file(path: &Path, h: [f64; 2], origin: [f64; 2], periodic: bool) -> CliResult<SetMask> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    read_pbm(&text, h, origin, periodic)
}

pub fn write_pbm(mask: &SetMask) -> String {
    let mut out = format!("P1\n{} {}\n", mask.n[0], mask.n[1]);
    for i2 in 0..mask.n[1] {
        let row: Vec<&str> = (0..mask.n[0]).map(|i1| if mask.get(i1, i2) { "1" } else { "0" }).collect();
        // keep lines under 70 characters
        for chunk in row.chunks(32) {
            out.push_str(&chunk.join(" "));
            out.push('\n');
        }
    }
    out
}

const FIELD_MAGIC: &[u8; 8] = b"MBGFLD01";

/// Binary layout: magic, then `n1, n2, origin1, origin2, h1, h2` as
/// little-endian `f64`, then row-major `(re, im)` pairs.
pub fn write_field_binary(f: &GridField, w: &mut impl Write) -> io::Result<()> {
    w.write_all(FIELD_MAGIC)?;
    let g = f.grid;
    for v in [g.n[0] as f64, g.n[1] as f64, g.origin[0], g.origin[1], g.h[0], g.h[1]] {
        w.write_all(&v.to_le_bytes())?;
    }
    for z in &f.data {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field_binary(r: &mut impl Read) -> CliResult<GridField> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    if buf.len() < 56 || &buf[..8] != FIELD_MAGIC {
        return Err(CliError::Format("not a grid-field file".into()));
    }
    let f64_at = |k: usize| f64::from_le_bytes(buf[k..k + 8].try_into().unwrap());
    let head: Vec<f64> = (0..6).map(|i| f64_at(8 + 8 * i)).collect();
    for &d in &head[..2] {
        if !(d >= 0.0 && d.fract() == 0.0 && d < 1e9) {
            return Err(CliError::Format("grid dimensions must be whole numbers".into()));
        }
    }
    let n = [head[0] as usize, head[1] as usize];
    let grid = GridSpec::new(n, [head[2], head[3]], [head[4], head[5]])?;
    let len = grid.len();
    if buf.len() != 56 + 16 * len {
        return Err(CliError::Format("grid-field payload length does not match the header".into()));
    }
    let data = (0..len).map(|i| Complex64::new(f64_at(56 + 16 * i), f64_at(64 + 16 * i))).collect();
    Ok(GridField { grid, data, tag: None })
}

/// `x1,x2,re,im` rows in storage order.
pub fn field_csv(f: &GridField) -> String {
    let mut out = String::from("x1,x2,re,im\n");
    for i2 in 0..f.grid.n[1] {
        for i1 in 0..f.grid.n[0] {
            let x = f.grid.point(i1, i2);
            let z = f.at(i1, i2);
            let _ = writeln!(out, "{},{},{},{}", x[0], x[1], z.re, z.im);
        }
    }
    out
}

/// `row col re im` lines, one per stored entry.
pub fn triplets_text(op: &MagneticOperator) -> String {
    let mut out = String::new();
    for (i, j, v) in op.triplets() {
        let _ = writeln!(out, "{i} {j} {} {}", v.re, v.im);
    }
    out
}

pub fn parse_triplets(text: &str) -> CliResult<Vec<(usize, usize, Complex64)>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let p: Vec<&str> = l.split_whitespace().collect();
            let bad = || CliError::Format(format!("bad triplet line `{l}`"));
            if p.len() != 4 {
                return Err(bad());
            }
            let i = p[0].parse().map_err(|_| bad())?;
            let j = p[1].parse().map_err(|_| bad())?;
            let re: f64 = p[2].parse().map_err(|_| bad())?;
            let im: f64 = p[3].parse().map_err(|_| bad())?;
            Ok((i, j, Complex64::new(re, im)))
        })
        .collect()
}

/// A CSV table with a header row; cells are preformatted strings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("CSV is UTF-8")
    }

    pub fn from_csv(text: &str) -> CliResult<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| CliError::Format(e.to_string()))?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(String::from).collect()).map_err(|e| CliError::Format(e.to_string())))
            .collect::<CliResult<_>>()?;
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }
}

/// Two whitespace-separated columns, one point per line.
pub fn plot_data(points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for (x, y) in points {
        let _ = writeln!(out, "{x} {y}");
    }
    out
}
