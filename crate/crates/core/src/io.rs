//! On-disk formats: JSON and a compact little-endian binary form for
//! (hypergraph, spins) pairs, plus the sparse-triplet JSON for B^(l).

use crate::hypergraph::{Hypergraph, SpinAssignment};
use crate::matrix::SparseSymMatrix;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
const BINARY_MAGIC: &[u8; 4] = b"HSBM";

#[derive(Debug, Serialize, Deserialize)]
struct HypergraphFile {
    #[serde(default = "default_schema")]
    schema: u32,
    n: usize,
    d: usize,
    spins: Vec<i8>,
    edges: Vec<Vec<u32>>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// Write as JSON, or as the binary form when the path ends in `.bin`.
pub fn write_hypergraph(path: &Path, h: &Hypergraph, spins: &SpinAssignment) -> Result<()> {
    if path.extension().is_some_and(|e| e == "bin") {
        write_hypergraph_binary(path, h, spins)
    } else {
        write_hypergraph_json(path, h, spins)
    }
}

pub fn write_hypergraph_json(path: &Path, h: &Hypergraph, spins: &SpinAssignment) -> Result<()> {
    let file = HypergraphFile {
        schema: SCHEMA_VERSION,
        n: h.n(),
        d: h.d(),
        spins: spins.as_slice().to_vec(),
        edges: h.edges().to_vec(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &file)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_hypergraph_binary(path: &Path, h: &Hypergraph, spins: &SpinAssignment) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&SCHEMA_VERSION.to_le_bytes())?;
    w.write_all(&(h.n() as u32).to_le_bytes())?;
    w.write_all(&(h.d() as u32).to_le_bytes())?;
    w.write_all(&(h.num_edges() as u32).to_le_bytes())?;
    for i in 0..h.n() {
        w.write_all(&[spins.get(i) as u8])?;
    }
    for e in h.edges() {
        for &v in e {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read either format, sniffing the binary magic.
pub fn read_hypergraph(path: &Path) -> Result<(Hypergraph, SpinAssignment)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 4];
    let got = r.read(&mut head)?;
    if got == 4 && &head == BINARY_MAGIC {
        return read_hypergraph_binary(r);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    let mut buf = head[..got].to_vec();
    buf.extend_from_slice(&rest);
    let file: HypergraphFile = serde_json::from_slice(&buf)?;
    if file.spins.len() != file.n {
        return Err(Error::Malformed(format!(
            "spins length {} does not match n = {}",
            file.spins.len(),
            file.n
        )));
    }
    Ok((
        Hypergraph::new(file.n, file.d, file.edges)?,
        SpinAssignment::new(file.spins)?,
    ))
}

fn read_hypergraph_binary(mut r: impl Read) -> Result<(Hypergraph, SpinAssignment)> {
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |r: &mut dyn Read| -> Result<u32> {
        r.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut r)?;
    if version != SCHEMA_VERSION {
        return Err(Error::Malformed(format!(
            "unsupported binary version {version}"
        )));
    }
    let n = read_u32(&mut r)? as usize;
    let d = read_u32(&mut r)? as usize;
    let m = read_u32(&mut r)? as usize;
    let mut spin_bytes = vec![0u8; n];
    r.read_exact(&mut spin_bytes)?;
    let spins: Vec<i8> = spin_bytes.into_iter().map(|b| b as i8).collect();
    let mut edges = Vec::with_capacity(m);
    let mut edge_buf = vec![0u8; 4 * d];
    for _ in 0..m {
        r.read_exact(&mut edge_buf)?;
        edges.push(
            edge_buf
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        );
    }
    Ok((Hypergraph::new(n, d, edges)?, SpinAssignment::new(spins)?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SawMatrixFile {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub n: usize,
    pub l: usize,
    /// upper-triangle (i, j, count) with i <= j, row-major
    pub triplets: Vec<(u32, u32, u64)>,
}

pub fn write_saw_matrix(path: &Path, b: &SparseSymMatrix, l: usize) -> Result<()> {
    let file = SawMatrixFile {
        schema: SCHEMA_VERSION,
        n: b.n(),
        l,
        triplets: b
            .upper_triplets()
            .into_iter()
            .map(|(i, j, v)| (i, j, v as u64))
            .collect(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &file)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_saw_matrix(path: &Path) -> Result<(SparseSymMatrix, usize)> {
    let r = BufReader::new(File::open(path)?);
    let file: SawMatrixFile = serde_json::from_reader(r)?;
    let m = SparseSymMatrix::from_triplets(
        file.n,
        file.triplets.into_iter().map(|(i, j, c)| (i, j, c as f64)),
    )?;
    Ok((m, file.l))
}
