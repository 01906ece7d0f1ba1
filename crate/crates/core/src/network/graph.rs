use std::fmt;

use super::Violation;

/// Square sparse 0/1 matrix stored as sorted row indices per column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    columns: Vec<Vec<usize>>,
}

impl BinaryMatrix {
    pub fn new(size: usize) -> Self {
        Self {
            columns: vec![Vec::new(); size],
        }
    }

    pub fn from_dense(rows: &[&[u8]]) -> Self {
        let mut m = Self::new(rows.len());
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    m.insert(i, j);
                }
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.columns[j].binary_search(&i).is_ok()
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        let col = &mut self.columns[j];
        if let Err(pos) = col.binary_search(&i) {
            col.insert(pos, i);
        }
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        let col = &mut self.columns[j];
        if let Ok(pos) = col.binary_search(&i) {
            col.remove(pos);
        }
    }

    /// Row indices of the ones in column `j`, ascending.
    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    /// Column indices of the ones in row `i`, ascending.
    pub fn row(&self, i: usize) -> Vec<usize> {
        (0..self.size()).filter(|&j| self.get(i, j)).collect()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&i| (i, j)))
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let n = self.size();
        let mut out = vec![vec![0u8; n]; n];
        for (i, j) in self.entries() {
            out[i][j] = 1;
        }
        out
    }
}

impl fmt::Display for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_dense() {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Direct hidden-layer edges: entry `(i, j)` means node `i` feeds node `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n_sources: usize,
    matrix: BinaryMatrix,
}

impl AdjacencyMatrix {
    pub fn from_entries(size: usize, n_sources: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut matrix = BinaryMatrix::new(size);
        for (i, j) in entries {
            matrix.insert(i, j);
        }
        Self { n_sources, matrix }
    }

    pub fn from_matrix(n_sources: usize, matrix: BinaryMatrix) -> Self {
        Self { n_sources, matrix }
    }

    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    pub fn matrix(&self) -> &BinaryMatrix {
        &self.matrix
    }

    /// Checks strict upper-triangularity, empty source columns and exactly
    /// two incoming edges per intermediate column.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, j) in self.matrix.entries() {
            if i >= j {
                out.push(Violation::NotUpperTriangular { row: i, col: j });
            }
        }
        for j in 0..self.size() {
            let count = self.matrix.column(j).len();
            if j < self.n_sources {
                if count != 0 {
                    out.push(Violation::SourceHasParents { node: j });
                }
            } else if count != 2 {
                out.push(Violation::ColumnDegree { node: j, count });
            }
        }
        out
    }
}

/// Source-to-node reachability. Rows of intermediate nodes are always empty
/// and a source does not reach itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionMatrix {
    n_sources: usize,
    matrix: BinaryMatrix,
}

impl InteractionMatrix {
    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    pub fn matrix(&self) -> &BinaryMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.matrix.get(i, j)
    }

    /// Source nodes reaching node `j`.
    pub fn sources_of(&self, j: usize) -> &[usize] {
        self.matrix.column(j)
    }
}

/// Derives the interaction matrix by walking each column backwards through
/// the parents, starting from a copy of the adjacency matrix.
///
/// Columns are processed in index order, so by the time column `j` is
/// visited every earlier intermediate column already lists only its source
/// ancestors and can be expanded in one step.
pub(crate) fn interaction_matrix(adj: &AdjacencyMatrix) -> InteractionMatrix {
    let nd = adj.n_sources();
    let m = adj.size();
    let mut ir = adj.matrix().clone();
    let mut seen = vec![usize::MAX; m];
    for j in 0..m {
        let mut frontier = vec![j];
        seen[j] = j;
        let mut head = 0;
        while head < frontier.len() {
            let i = frontier[head];
            head += 1;
            if i >= nd {
                for &p in ir.column(i).to_vec().iter() {
                    if seen[p] != j {
                        seen[p] = j;
                        frontier.push(p);
                    }
                }
                ir.remove(i, j);
            } else if i != j {
                ir.insert(i, j);
            }
        }
    }
    InteractionMatrix {
        n_sources: nd,
        matrix: ir,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_adjacency() -> AdjacencyMatrix {
        #[rustfmt::skip]
        let rows: [&[u8]; 8] = [
            &[0, 0, 0, 0, 1, 1, 0, 0],
            &[0, 0, 0, 0, 0, 0, 1, 1],
            &[0, 0, 0, 0, 1, 0, 0, 0],
            &[0, 0, 0, 0, 0, 1, 0, 0],
            &[0, 0, 0, 0, 0, 0, 1, 0],
            &[0, 0, 0, 0, 0, 0, 0, 1],
            &[0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0, 0, 0],
        ];
        AdjacencyMatrix::from_matrix(4, BinaryMatrix::from_dense(&rows))
    }

    #[test]
    fn example_interaction_matrix() {
        let adj = example_adjacency();
        assert!(adj.validate().is_empty());
        #[rustfmt::skip]
        let expect: [&[u8]; 8] = [
            &[0, 0, 0, 0, 1, 1, 1, 1],
            &[0, 0, 0, 0, 0, 0, 1, 1],
            &[0, 0, 0, 0, 1, 0, 1, 0],
            &[0, 0, 0, 0, 0, 1, 0, 1],
            &[0; 8],
            &[0; 8],
            &[0; 8],
            &[0; 8],
        ];
        assert_eq!(*interaction_matrix(&adj).matrix(), BinaryMatrix::from_dense(&expect));
    }

    #[test]
    fn no_intermediates_gives_empty_matrix() {
        let adj = AdjacencyMatrix::from_entries(3, 3, []);
        let ir = interaction_matrix(&adj);
        assert_eq!(ir.matrix().nnz(), 0);
        assert_eq!(*ir.matrix(), *adj.matrix());
    }

    #[test]
    fn column_with_three_parents() {
        let adj = AdjacencyMatrix::from_entries(4, 3, [(0, 3), (1, 3), (2, 3)]);
        assert_eq!(adj.validate(), vec![Violation::ColumnDegree { node: 3, count: 3 }]);
    }

    #[test]
    fn lower_triangle_and_source_parents() {
        let adj = AdjacencyMatrix::from_entries(3, 2, [(2, 1), (0, 2), (1, 2)]);
        let v = adj.validate();
        assert!(v.contains(&Violation::NotUpperTriangular { row: 2, col: 1 }));
        assert!(v.contains(&Violation::SourceHasParents { node: 1 }));
    }

    #[test]
    fn rows_and_columns() {
        let adj = example_adjacency();
        assert_eq!(adj.matrix().row(0), vec![4, 5]);
        assert_eq!(adj.matrix().column(6), &[1, 4]);
        assert_eq!(adj.matrix().nnz(), 8);
    }
}
