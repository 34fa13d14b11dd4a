use crate::error::{Result, TtError};

/// Dense multiway array with a fixed linearization: the last index varies
/// fastest (row-major). Offset of `(i_1, ..., i_d)` is
/// `((i_1 * n_2 + i_2) * n_3 + ...) + i_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&n| n == 0) {
            return Err(TtError::InvalidArgument(format!(
                "tensor shape must be non-empty with positive modes, got {shape:?}"
            )));
        }
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(TtError::ShapeMismatch(format!(
                "shape {shape:?} wants {numel} entries, buffer has {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        Self::new(shape, vec![0.0; numel])
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Self::zeros(shape)?;
        let mut idx = vec![0usize; t.ndim()];
        for pos in 0..t.len() {
            t.data[pos] = f(&idx);
            Self::advance(&mut idx, &t.shape);
        }
        Ok(t)
    }

    fn advance(idx: &mut [usize], shape: &[usize]) {
        for k in (0..shape.len()).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                return;
            }
            idx[k] = 0;
        }
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut off = 0usize;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.shape[k]);
            off = off * self.shape[k] + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let off = self.offset(idx);
        self.data[off] = v;
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(TtError::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Iterates `(multi_index, value)` in linearization order.
    pub fn iter_indexed(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let shape = self.shape.clone();
        let mut idx = vec![0usize; shape.len()];
        let mut first = true;
        self.data.iter().map(move |&v| {
            if !first {
                Self::advance(&mut idx, &shape);
            }
            first = false;
            (idx.clone(), v)
        })
    }

    /// Reinterprets the buffer with a new shape of identical volume.
    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linearization_is_last_index_fastest() {
        let t = DenseTensor::new(vec![2, 3], (0..6).map(|x| x as f64).collect()).unwrap();
        assert_eq!(t.get(&[0, 0]), 0.0);
        assert_eq!(t.get(&[0, 2]), 2.0);
        assert_eq!(t.get(&[1, 0]), 3.0);
        assert_eq!(t.get(&[1, 2]), 5.0);
    }

    #[test]
    fn from_fn_visits_every_index_once() {
        let t = DenseTensor::from_fn(vec![2, 2, 2], |i| (4 * i[0] + 2 * i[1] + i[2]) as f64)
            .unwrap();
        assert_eq!(t.data(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn indexed_iteration_matches_offsets() {
        let t = DenseTensor::from_fn(vec![3, 2], |i| (i[0] * 10 + i[1]) as f64).unwrap();
        for (idx, v) in t.iter_indexed() {
            assert_eq!(t.get(&idx), v);
        }
    }
}
