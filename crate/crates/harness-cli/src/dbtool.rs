//! Database construction from a records file.
//!
//! Records CSV columns: cell_x,cell_y,channel,time_window,eirp_centi_dbm,
//! available(0|1)[,aux_hex]. Grid dimensions are inferred from the maxima
//! unless given explicitly.

use std::path::Path;

use crypto_backends::{SigBackend, SigKeypair};
use pow::PowKind;
use spectrum_db::{
    build_matrix, db_save, puzzle_bind, BindConfig, DbFileHeader, GridCoordinate, IndexDims,
    SchemeId, SpectrumRecord,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DbToolError {
    #[error("records file: {0}")]
    Records(String),
    #[error("database: {0}")]
    Db(#[from] spectrum_db::DbError),
}

pub fn parse_records(text: &str) -> Result<Vec<SpectrumRecord>, DbToolError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() < 6 {
            return Err(DbToolError::Records(format!("line {}: expected 6+ columns", lineno + 1)));
        }
        let num = |i: usize| -> Result<i64, DbToolError> {
            cols[i]
                .parse()
                .map_err(|_| DbToolError::Records(format!("line {}: bad number '{}'", lineno + 1, cols[i])))
        };
        let aux = if cols.len() > 6 && !cols[6].is_empty() {
            hex::decode(cols[6])
                .map_err(|_| DbToolError::Records(format!("line {}: bad hex payload", lineno + 1)))?
        } else {
            Vec::new()
        };
        out.push(SpectrumRecord {
            coord: GridCoordinate { cell_x: num(0)? as u32, cell_y: num(1)? as u32 },
            channel: num(2)? as u32,
            time_window: num(3)? as u32,
            eirp_centi_dbm: num(4)? as i32,
            available: num(5)? != 0,
            aux,
        });
    }
    Ok(out)
}

pub fn infer_dims(records: &[SpectrumRecord]) -> IndexDims {
    let max = |f: fn(&SpectrumRecord) -> u32| records.iter().map(f).max().unwrap_or(0) + 1;
    IndexDims {
        n_cols: max(|r| r.coord.cell_x),
        n_rows: max(|r| r.coord.cell_y),
        n_ch: max(|r| r.channel),
        n_tv: max(|r| r.time_window),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn build_db_file(
    records: &[SpectrumRecord],
    dims: &IndexDims,
    block_bytes: usize,
    pow_kind: Option<PowKind>,
    kappas: &[u32],
    window_id: u64,
    seed: u64,
    out: &Path,
) -> Result<(usize, usize), DbToolError> {
    let db = build_matrix(records, dims, block_bytes * 8)?;
    let db = match pow_kind {
        Some(kind) if !kappas.is_empty() => {
            let mut signer_seed = [0u8; 32];
            signer_seed[..8].copy_from_slice(&seed.to_le_bytes());
            let signer = SigKeypair::from_seed(SigBackend::MlDsa44, signer_seed);
            let mut bind_seed = [0u8; 32];
            bind_seed[..8].copy_from_slice(&seed.wrapping_add(1).to_le_bytes());
            puzzle_bind(
                &db,
                &signer,
                &BindConfig { pow_kind: kind, difficulties: kappas.to_vec(), window_id, bind_seed },
            )?
        }
        _ => db,
    };
    let header = DbFileHeader {
        rows: db.rows() as u32,
        block_bits: db.block_bits() as u32,
        scheme: SchemeId::Unassigned,
        pow_kind: pow_kind.map_or(0, |k| k.tag()),
    };
    db_save(&db, &header, out)?;
    Ok((db.rows(), db.block_bytes()))
}
