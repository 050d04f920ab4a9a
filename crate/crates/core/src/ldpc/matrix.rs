use std::collections::VecDeque;

use super::LdpcError;

/// Sparse binary parity-check matrix stored as row and column adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    num_rows: usize,
    num_cols: usize,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
}

impl ParityCheckMatrix {
    /// Empty matrix with the given shape.
    pub fn new(num_rows: usize, num_cols: usize) -> Self {
        Self {
            num_rows,
            num_cols,
            rows: vec![Vec::new(); num_rows],
            cols: vec![Vec::new(); num_cols],
        }
    }

    /// Builds a matrix from `(row, col)` positions of its ones.
    ///
    /// Duplicate entries are rejected since they would cancel over GF(2).
    pub fn from_entries(
        num_rows: usize,
        num_cols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, LdpcError> {
        let mut h = Self::new(num_rows, num_cols);
        for (r, c) in entries {
            if r >= num_rows || c >= num_cols {
                return Err(LdpcError::Format(format!(
                    "entry ({r}, {c}) outside {num_rows}x{num_cols} matrix"
                )));
            }
            if h.contains(r, c) {
                return Err(LdpcError::Format(format!("duplicate entry ({r}, {c})")));
            }
            h.insert(r, c);
        }
        h.sort();
        Ok(h)
    }

    /// Builds a matrix from dense 0/1 rows.
    pub fn from_dense(rows: &[&[u8]]) -> Self {
        let num_cols = rows.first().map_or(0, |r| r.len());
        let mut h = Self::new(rows.len(), num_cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), num_cols, "ragged dense matrix");
            for (c, &v) in row.iter().enumerate() {
                if v & 1 == 1 {
                    h.insert(r, c);
                }
            }
        }
        h
    }

    pub(crate) fn insert(&mut self, row: usize, col: usize) {
        self.rows[row].push(col as u32);
        self.cols[col].push(row as u32);
    }

    pub(crate) fn sort(&mut self) {
        self.rows.iter_mut().for_each(|r| r.sort_unstable());
        self.cols.iter_mut().for_each(|c| c.sort_unstable());
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.rows[row].contains(&(col as u32))
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Column indices of the ones in `row`.
    pub fn row(&self, row: usize) -> &[u32] {
        &self.rows[row]
    }

    /// Row indices of the ones in `col`.
    pub fn col(&self, col: usize) -> &[u32] {
        &self.cols[col]
    }

    pub fn row_weight(&self, row: usize) -> usize {
        self.rows[row].len()
    }

    pub fn col_weight(&self, col: usize) -> usize {
        self.cols[col].len()
    }

    /// Design rate `1 - rows / cols`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.num_rows as f64 / self.num_cols as f64
    }

    /// Computes `H x` over GF(2).
    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>, LdpcError> {
        if bits.len() != self.num_cols {
            return Err(LdpcError::LengthMismatch {
                expected: self.num_cols,
                actual: bits.len(),
            });
        }
        Ok(self.syndrome_unchecked(bits))
    }

    pub(crate) fn syndrome_unchecked(&self, bits: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ (bits[c as usize] & 1)))
            .collect()
    }

    /// True when the Tanner graph, restricted to nodes with at least one edge,
    /// is a single connected component and no column is empty.
    pub fn is_connected(&self) -> bool {
        if self.num_cols == 0 {
            return true;
        }
        if self.cols.iter().any(Vec::is_empty) {
            return false;
        }
        let mut seen_col = vec![false; self.num_cols];
        let mut seen_row = vec![false; self.num_rows];
        let mut queue = VecDeque::from([0usize]);
        seen_col[0] = true;
        let mut reached = 1;
        while let Some(c) = queue.pop_front() {
            for &r in &self.cols[c] {
                if std::mem::replace(&mut seen_row[r as usize], true) {
                    continue;
                }
                for &c2 in &self.rows[r as usize] {
                    if !std::mem::replace(&mut seen_col[c2 as usize], true) {
                        reached += 1;
                        queue.push_back(c2 as usize);
                    }
                }
            }
        }
        reached == self.num_cols
    }

    /// Length of the shortest cycle in the Tanner graph, or `None` if the
    /// graph is a forest.
    ///
    /// Runs a breadth-first search from every column, so the cost is
    /// `O(cols * edges)`; intended for codes up to a few tens of thousands of
    /// columns. `limit` stops the search early once a cycle of at most that
    /// length has been found everywhere it could be shorter.
    pub fn girth(&self, limit: Option<usize>) -> Option<usize> {
        let mut best = usize::MAX;
        // Node ids: columns 0..n, rows n..n+m.
        let n = self.num_cols;
        let total = n + self.num_rows;
        let mut dist = vec![u32::MAX; total];
        let mut parent = vec![u32::MAX; total];
        let mut touched = Vec::new();
        for start in 0..n {
            if limit.is_some_and(|l| best <= l) {
                break;
            }
            for &t in &touched {
                dist[t] = u32::MAX;
                parent[t] = u32::MAX;
            }
            touched.clear();
            let mut queue = VecDeque::new();
            dist[start] = 0;
            touched.push(start);
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                let du = dist[u] as usize;
                // Any cycle found deeper than this cannot beat `best`.
                if 2 * du + 1 >= best {
                    break;
                }
                let neighbours: Box<dyn Iterator<Item = usize>> = if u < n {
                    Box::new(self.cols[u].iter().map(|&r| r as usize + n))
                } else {
                    Box::new(self.rows[u - n].iter().map(|&c| c as usize))
                };
                for v in neighbours {
                    if parent[u] == v as u32 {
                        continue;
                    }
                    if dist[v] == u32::MAX {
                        dist[v] = du as u32 + 1;
                        parent[v] = u as u32;
                        touched.push(v);
                        queue.push_back(v);
                    } else {
                        best = best.min(du + dist[v] as usize + 1);
                    }
                }
            }
        }
        (best != usize::MAX).then_some(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming_7_4() -> ParityCheckMatrix {
        ParityCheckMatrix::from_dense(&[&[1, 1, 0, 1, 1, 0, 0], &[1, 0, 1, 1, 0, 1, 0], &[0, 1, 1, 1, 0, 0, 1]])
    }

    #[test]
    fn syndrome_of_codeword_is_zero() {
        let h = hamming_7_4();
        assert_eq!(h.syndrome(&[1, 1, 1, 1, 1, 1, 1]).unwrap(), vec![0, 0, 0]);
        assert_eq!(h.syndrome(&[1, 0, 0, 0, 0, 0, 0]).unwrap(), vec![1, 1, 0]);
        assert_eq!(h.syndrome(&[1, 0, 0, 0, 1, 1, 0]).unwrap(), vec![0, 0, 0]);
        assert!(matches!(
            h.syndrome(&[0; 6]),
            Err(LdpcError::LengthMismatch { expected: 7, actual: 6 })
        ));
    }

    #[test]
    fn girth_of_small_graphs() {
        // Columns 0 and 1 share rows 0 and 1: a 4-cycle.
        let h = ParityCheckMatrix::from_dense(&[&[1, 1, 0], &[1, 1, 1]]);
        assert_eq!(h.girth(None), Some(4));
        // A path has no cycle.
        let tree = ParityCheckMatrix::from_dense(&[&[1, 1, 0], &[0, 1, 1]]);
        assert_eq!(tree.girth(None), None);
        // Rows 0 and 1 share columns 0 and 3.
        assert_eq!(hamming_7_4().girth(None), Some(4));
    }

    #[test]
    fn six_cycle_is_found() {
        // Triangle over three columns and three rows.
        let h = ParityCheckMatrix::from_dense(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        assert_eq!(h.girth(None), Some(6));
    }

    #[test]
    fn connectivity() {
        assert!(hamming_7_4().is_connected());
        let split = ParityCheckMatrix::from_dense(&[&[1, 1, 0, 0], &[0, 0, 1, 1]]);
        assert!(!split.is_connected());
    }

    #[test]
    fn duplicate_entries_rejected() {
        assert!(ParityCheckMatrix::from_entries(2, 2, [(0, 0), (0, 0)]).is_err());
        assert!(ParityCheckMatrix::from_entries(2, 2, [(0, 3)]).is_err());
    }
}
