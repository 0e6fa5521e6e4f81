//! Grid index: row-major composition of (cell, channel, time window).
//!
//! The encoder is a bijection between the configured tuple space and the
//! row range [0, r); geohash-style codecs can replace it behind the same
//! two functions since nothing else assumes the row-major layout.

use crate::DbError;

/// Discrete grid cell, derived from raw coordinates by a fixed cell size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridCoordinate {
    pub cell_x: u32,
    pub cell_y: u32,
}

/// Index-space dimensions of one database deployment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexDims {
    pub n_cols: u32,
    pub n_rows: u32,
    pub n_ch: u32,
    pub n_tv: u32,
}

impl IndexDims {
    pub fn total_rows(&self) -> usize {
        self.n_cols as usize * self.n_rows as usize * self.n_ch as usize * self.n_tv as usize
    }
}

/// θ = ((cell_y·n_cols + cell_x)·n_ch + channel)·n_tv + time_window.
pub fn db_index(
    coord: GridCoordinate,
    channel: u32,
    time_window: u32,
    dims: &IndexDims,
) -> Result<usize, DbError> {
    let check = |field: &'static str, value: u32, limit: u32| {
        if value < limit {
            Ok(())
        } else {
            Err(DbError::Dimension { field, value: value as u64, limit: limit as u64 })
        }
    };
    check("cell_x", coord.cell_x, dims.n_cols)?;
    check("cell_y", coord.cell_y, dims.n_rows)?;
    check("channel", channel, dims.n_ch)?;
    check("time_window", time_window, dims.n_tv)?;
    let cell = coord.cell_y as usize * dims.n_cols as usize + coord.cell_x as usize;
    Ok((cell * dims.n_ch as usize + channel as usize) * dims.n_tv as usize + time_window as usize)
}

/// Inverse of [`db_index`] over [0, r).
pub fn db_unindex(theta: usize, dims: &IndexDims) -> Result<(GridCoordinate, u32, u32), DbError> {
    if theta >= dims.total_rows() {
        return Err(DbError::Dimension {
            field: "theta",
            value: theta as u64,
            limit: dims.total_rows() as u64,
        });
    }
    let time_window = (theta % dims.n_tv as usize) as u32;
    let rest = theta / dims.n_tv as usize;
    let channel = (rest % dims.n_ch as usize) as u32;
    let cell = rest / dims.n_ch as usize;
    let coord = GridCoordinate {
        cell_x: (cell % dims.n_cols as usize) as u32,
        cell_y: (cell / dims.n_cols as usize) as u32,
    };
    Ok((coord, channel, time_window))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIMS: IndexDims = IndexDims { n_cols: 4, n_rows: 5, n_ch: 2, n_tv: 4 };

    #[test]
    fn origin_maps_to_first_row() {
        let d = IndexDims { n_cols: 3, n_rows: 3, n_ch: 2, n_tv: 2 };
        assert_eq!(db_index(GridCoordinate { cell_x: 0, cell_y: 0 }, 0, 0, &d).unwrap(), 0);
    }

    #[test]
    fn row_major_successor() {
        let d = IndexDims { n_cols: 8, n_rows: 2, n_ch: 1, n_tv: 1 };
        assert_eq!(db_index(GridCoordinate { cell_x: 1, cell_y: 0 }, 0, 0, &d).unwrap(), 1);
    }

    #[test]
    fn matches_nested_loop_enumeration_oracle() {
        // Independent oracle: enumerate tuples in loop order and assert the
        // encoder agrees with each tuple's position.
        let mut position = 0usize;
        for cell_y in 0..DIMS.n_rows {
            for cell_x in 0..DIMS.n_cols {
                for ch in 0..DIMS.n_ch {
                    for tv in 0..DIMS.n_tv {
                        let theta =
                            db_index(GridCoordinate { cell_x, cell_y }, ch, tv, &DIMS).unwrap();
                        assert_eq!(theta, position);
                        position += 1;
                    }
                }
            }
        }
        assert_eq!(position, DIMS.total_rows());
        // The specific tuple called out as the worked example.
        let theta = db_index(GridCoordinate { cell_x: 2, cell_y: 3 }, 1, 2, &DIMS).unwrap();
        let expected = ((3 * 4 + 2) * 2 + 1) * 4 + 2;
        assert_eq!(theta, expected);
    }

    #[test]
    fn bijective_with_unindex() {
        for theta in 0..DIMS.total_rows() {
            let (c, ch, tv) = db_unindex(theta, &DIMS).unwrap();
            assert_eq!(db_index(c, ch, tv, &DIMS).unwrap(), theta);
        }
    }

    #[test]
    fn out_of_range_names_the_field() {
        let err = db_index(GridCoordinate { cell_x: 4, cell_y: 0 }, 0, 0, &DIMS).unwrap_err();
        assert_eq!(err, DbError::Dimension { field: "cell_x", value: 4, limit: 4 });
        let err = db_index(GridCoordinate { cell_x: 0, cell_y: 0 }, 2, 0, &DIMS).unwrap_err();
        assert_eq!(err, DbError::Dimension { field: "channel", value: 2, limit: 2 });
    }
}
