use serde::{Deserialize, Serialize};

use crate::world::CellIndex;

/// Dense row-major 2D grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "grid data length mismatch");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn flat_index(&self, cell: CellIndex) -> usize {
        debug_assert!(cell.row < self.rows && cell.col < self.cols);
        cell.row * self.cols + cell.col
    }

    pub fn get(&self, cell: CellIndex) -> Option<&T> {
        (cell.row < self.rows && cell.col < self.cols).then(|| &self.data[cell.row * self.cols + cell.col])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (CellIndex, &T)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (CellIndex::new(i / cols, i % cols), v))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn same_shape<U>(&self, other: &Grid<U>) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

impl<T> std::ops::Index<CellIndex> for Grid<T> {
    type Output = T;

    fn index(&self, cell: CellIndex) -> &T {
        &self.data[self.flat_index(cell)]
    }
}

impl<T> std::ops::IndexMut<CellIndex> for Grid<T> {
    fn index_mut(&mut self, cell: CellIndex) -> &mut T {
        let i = self.flat_index(cell);
        &mut self.data[i]
    }
}
