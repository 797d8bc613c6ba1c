//! On-disk cache of sampled heat kernels, one GHF1 file per (model, t, grid).

use std::path::{Path, PathBuf};

use super::{HeatError, HeatModel};
use crate::field::{io, Grid, SampledField};
use crate::scalar::Real;
use crate::table::fmt_num;

#[derive(Debug, Clone)]
pub struct KernelCache {
    dir: PathBuf,
}

impl KernelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File name for a key; characters outside `[A-Za-z0-9.+-]` become `_`.
    pub fn file_name<T: Real>(model: &HeatModel<T>, t: T, grid: &Grid<T>) -> String {
        let key = format!(
            "{}_{}_t{}_{}",
            model.group().name(),
            model.kind().name(),
            fmt_num(t.as_f64()),
            grid.spec()
        );
        let clean: String = key
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || ".+-".contains(c) {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        format!("{clean}.ghf")
    }

    /// Loads h_t on `grid` if cached, otherwise samples and stores it.
    pub fn kernel_field<T: Real>(
        &self,
        model: &HeatModel<T>,
        t: T,
        grid: &Grid<T>,
    ) -> Result<SampledField<T>, HeatError> {
        let path = self.dir.join(Self::file_name(model, t, grid));
        if path.exists() {
            if let Ok(f) = io::load(&path, Some(model.group().clone())) {
                if f.grid() == grid {
                    return Ok(f);
                }
            }
        }
        let f = model.kernel_field(t, grid)?;
        std::fs::create_dir_all(&self.dir).map_err(crate::field::FieldError::from)?;
        io::save(&f, &path)?;
        Ok(f)
    }
}
