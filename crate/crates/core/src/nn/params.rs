/// Models whose trainable state is a fixed list of `f64` slices.
///
/// Gradients of a model are stored in a value of the same type (built with
/// `zeros_like`), so optimizers and gradient checks work on the flattened
/// concatenation of the slices in declaration order.
pub trait Params {
    fn param_slices(&self) -> Vec<&[f64]>;

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]>;

    fn n_params(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for s in self.param_slices() {
            out.extend_from_slice(s);
        }
        out
    }

    fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params(), "flat parameter length");
        let mut off = 0;
        for s in self.param_slices_mut() {
            let n = s.len();
            s.copy_from_slice(&flat[off..off + n]);
            off += n;
        }
    }

    fn fill_zero(&mut self) {
        for s in self.param_slices_mut() {
            s.fill(0.0);
        }
    }

    /// `self += scale * other`, slice by slice.
    fn axpy(&mut self, scale: f64, other: &Self)
    where
        Self: Sized,
    {
        for (d, s) in self
            .param_slices_mut()
            .into_iter()
            .zip(other.param_slices())
        {
            for (a, b) in d.iter_mut().zip(s) {
                *a += scale * b;
            }
        }
    }

    fn all_finite(&self) -> bool {
        self.param_slices()
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
    }
}
