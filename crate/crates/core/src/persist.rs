//! On-disk formats: a versioned little-endian binary index file and the
//! canonical flat dataset CSV.
//!
//! Index files do not embed the original vectors; the dataset travels as
//! its own CSV and is re-supplied at load time, where its shape and id
//! coverage are checked against the file.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::index::{IndexParams, LshIndex, RankSpace};
use crate::projection::{Provenance, ProjectionSet};
use crate::signature::BucketKey;

const MAGIC: [u8; 4] = *b"LSHI";
const VERSION: u16 = 1;

/// Writes an index: header, then per table the projection matrix followed
/// by its buckets (key bytes, then member ids in insertion order).
pub fn save_index(index: &LshIndex, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io("create", path, e))?;
    let mut w = BufWriter::new(file);
    write_index(index, &mut w).map_err(|e| Error::io("write", path, e))?;
    w.flush().map_err(|e| Error::io("write", path, e))?;
    Ok(())
}

fn write_index(index: &LshIndex, w: &mut impl Write) -> io::Result<()> {
    let params = index.params();
    let dataset = index.dataset();
    w.write_all(&MAGIC)?;
    w.write_u16::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(dataset.d() as u32)?;
    w.write_u32::<LittleEndian>(dataset.n() as u32)?;
    w.write_u32::<LittleEndian>(params.hash_size as u32)?;
    w.write_u32::<LittleEndian>(params.num_tables as u32)?;
    w.write_u64::<LittleEndian>(params.seed)?;
    w.write_u8(match params.rank_space {
        RankSpace::Projected => 0,
        RankSpace::Original => 1,
    })?;
    w.write_u8(match index.projections().provenance() {
        Provenance::GaussianSeeded => 0,
        Provenance::Explicit => 1,
    })?;
    for table in 0..params.num_tables {
        for &value in index.projections().matrix(table) {
            w.write_f64::<LittleEndian>(value)?;
        }
        let buckets = index.table(table);
        w.write_u32::<LittleEndian>(buckets.len() as u32)?;
        for (key, members) in buckets {
            w.write_u16::<LittleEndian>(key.bytes().len() as u16)?;
            w.write_all(key.bytes())?;
            w.write_u32::<LittleEndian>(members.len() as u32)?;
            for &id in members {
                let id32 = u32::try_from(id)
                    .map_err(|_| io::Error::other(Error::IdTooLarge(id).to_string()))?;
                w.write_u32::<LittleEndian>(id32)?;
            }
        }
    }
    Ok(())
}

/// Reads an index written by [`save_index`], validating the header against
/// the supplied dataset and every stored id against its id set. The
/// projected-space ranking cache is recomputed from the stored matrices.
pub fn load_index<'a>(path: impl AsRef<Path>, dataset: &'a Dataset) -> Result<LshIndex<'a>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io("open", path, e))?;
    let mut r = BufReader::new(file);
    let index = read_index(&mut r, dataset, path)?;
    let mut probe = [0u8; 1];
    match r.read(&mut probe) {
        Ok(0) => Ok(index),
        Ok(_) => Err(Error::format(path, "trailing data after index body")),
        Err(e) => Err(Error::io("read", path, e)),
    }
}

fn read_index<'a>(
    r: &mut impl Read,
    dataset: &'a Dataset,
    path: &Path,
) -> Result<LshIndex<'a>> {
    let io_err = |e: io::Error| -> Error {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            Error::format(path, "unexpected end of file")
        } else {
            Error::io("read", path, e)
        }
    };

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if magic != MAGIC {
        return Err(Error::format(path, "not an index file"));
    }
    let version = r.read_u16::<LittleEndian>().map_err(io_err)?;
    if version != VERSION {
        return Err(Error::format(
            path,
            format!("unsupported index version {version}"),
        ));
    }
    let d = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
    let n = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
    let hash_size = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
    let num_tables = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
    let seed = r.read_u64::<LittleEndian>().map_err(io_err)?;
    let rank_space = match r.read_u8().map_err(io_err)? {
        0 => RankSpace::Projected,
        1 => RankSpace::Original,
        other => {
            return Err(Error::format(path, format!("invalid rank space tag {other}")));
        }
    };
    let provenance = match r.read_u8().map_err(io_err)? {
        0 => Provenance::GaussianSeeded,
        1 => Provenance::Explicit,
        other => {
            return Err(Error::format(path, format!("invalid provenance tag {other}")));
        }
    };
    if d != dataset.d() || n != dataset.n() {
        return Err(Error::format(
            path,
            format!(
                "index was built over {n} rows of dimension {d}, dataset has {} rows of dimension {}",
                dataset.n(),
                dataset.d()
            ),
        ));
    }
    if hash_size == 0 || num_tables == 0 {
        return Err(Error::format(path, "invalid zero hash size or table count"));
    }

    let params = IndexParams {
        hash_size,
        num_tables,
        seed,
        rank_space,
    };
    let key_len = hash_size.div_ceil(8);
    let mut matrices = Vec::with_capacity(num_tables);
    let mut tables = Vec::with_capacity(num_tables);
    for table in 0..num_tables {
        let mut matrix = vec![0.0f64; hash_size * d];
        for value in matrix.iter_mut() {
            *value = r.read_f64::<LittleEndian>().map_err(io_err)?;
        }
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::format(
                path,
                format!("table {table}: non-finite projection entry"),
            ));
        }
        matrices.push(matrix);

        let bucket_count = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
        let mut buckets: BTreeMap<BucketKey, Vec<u64>> = BTreeMap::new();
        let mut seen_rows = vec![false; dataset.n()];
        let mut membership = 0usize;
        for _ in 0..bucket_count {
            let stored_len = r.read_u16::<LittleEndian>().map_err(io_err)? as usize;
            if stored_len != key_len {
                return Err(Error::format(
                    path,
                    format!(
                        "table {table}: bucket key of {stored_len} bytes does not match hash size {hash_size}"
                    ),
                ));
            }
            let mut key_bytes = vec![0u8; stored_len];
            r.read_exact(&mut key_bytes).map_err(io_err)?;
            let key = BucketKey::from_bytes(key_bytes, hash_size)
                .map_err(|e| Error::format(path, format!("table {table}: {e}")))?;
            let member_count = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
            let mut members = Vec::with_capacity(member_count);
            for _ in 0..member_count {
                let id = r.read_u32::<LittleEndian>().map_err(io_err)? as u64;
                let row = dataset.row_of_id(id).ok_or_else(|| {
                    Error::format(path, format!("bucket references unknown id {id}"))
                })?;
                if seen_rows[row] {
                    return Err(Error::format(
                        path,
                        format!("table {table}: id {id} appears in more than one bucket"),
                    ));
                }
                seen_rows[row] = true;
                members.push(id);
            }
            membership += members.len();
            if buckets.insert(key, members).is_some() {
                return Err(Error::format(path, format!("table {table}: duplicate bucket key")));
            }
        }
        if membership != dataset.n() {
            return Err(Error::format(
                path,
                format!(
                    "table {table}: buckets hold {membership} ids, dataset has {}",
                    dataset.n()
                ),
            ));
        }
        tables.push(buckets);
    }

    let projections = ProjectionSet::from_flat(matrices, hash_size, d, provenance);
    LshIndex::from_parts(dataset, params, projections, tables)
}

/// Writes a dataset in the canonical flat CSV form (`id,f1,...,fd` with a
/// header row). Values are printed with round-trip-safe formatting, so
/// reading the file back reproduces the dataset exactly.
pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io("create", path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>, line: &str| -> Result<()> {
        w.write_all(line.as_bytes())
            .map_err(|e| Error::io("write", path, e))
    };
    let mut header = String::from("id");
    for i in 1..=dataset.d() {
        header.push_str(&format!(",f{i}"));
    }
    header.push('\n');
    write(&mut w, &header)?;
    let mut line = String::new();
    for row in 0..dataset.n() {
        line.clear();
        line.push_str(&dataset.id_at(row).to_string());
        for value in dataset.row(row) {
            line.push(',');
            line.push_str(&value.to_string());
        }
        line.push('\n');
        write(&mut w, &line)?;
    }
    w.flush().map_err(|e| Error::io("write", path, e))?;
    Ok(())
}

/// Reads a dataset CSV; identical to [`Dataset::load_csv`].
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    Dataset::load_csv(path)
}
