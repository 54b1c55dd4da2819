use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{kmeans, pixel_matrix, vca};
use crate::cube::HyperspectralCube;
use crate::error::{Error, Result};
use crate::io::{read_json, write_json};

const KMEANS_MAX_ITERS: usize = 300;
const KMEANS_TOL: f64 = 1e-6;

/// Dictionary of material spectra (`L x M`, one atom per column).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralLibrary {
    atoms: DMatrix<f64>,
    wavelengths: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryFile {
    bands: usize,
    wavelengths_nm: Vec<f64>,
    atoms: Vec<Vec<f64>>,
}

impl SpectralLibrary {
    pub fn new(atoms: DMatrix<f64>, wavelengths: Vec<f64>) -> Result<Self> {
        if atoms.ncols() == 0 {
            return Err(Error::InvalidArgument("library has no atoms".into()));
        }
        if atoms.nrows() != wavelengths.len() {
            return Err(Error::DimensionMismatch(format!(
                "library atoms have {} bands but {} wavelengths are given",
                atoms.nrows(),
                wavelengths.len()
            )));
        }
        if atoms.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "library atoms must be finite and nonnegative".into(),
            ));
        }
        if let Some(c) = (0..atoms.ncols()).find(|&c| atoms.column(c).iter().all(|&v| v == 0.0)) {
            return Err(Error::InvalidArgument(format!("library atom {c} is all zeros")));
        }
        Ok(Self { atoms, wavelengths })
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn bands(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = LibraryFile {
            bands: self.bands(),
            wavelengths_nm: self.wavelengths.clone(),
            atoms: (0..self.atom_count())
                .map(|c| self.atoms.column(c).iter().copied().collect())
                .collect(),
        };
        write_json(path, &file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: LibraryFile = read_json(path)?;
        if file.atoms.iter().any(|a| a.len() != file.bands) {
            return Err(Error::Format(format!(
                "{}: every atom must have {} values",
                path.display(),
                file.bands
            )));
        }
        let m = file.atoms.len();
        let atoms = DMatrix::from_fn(file.bands, m, |i, j| file.atoms[j][i]);
        Self::new(atoms, file.wavelengths_nm)
    }
}

/// Extracts `per_cube_r` endmembers from every cube with VCA, pools them and
/// clusters the pool into `atoms` centers; each center becomes one atom.
pub fn build_library(
    cubes: &[HyperspectralCube],
    per_cube_r: usize,
    atoms: usize,
    seed: u64,
) -> Result<SpectralLibrary> {
    let first = cubes
        .first()
        .ok_or_else(|| Error::InvalidArgument("no cubes to build a library from".into()))?;
    if let Some(i) = cubes.iter().position(|c| c.wavelengths() != first.wavelengths()) {
        return Err(Error::DimensionMismatch(format!(
            "cube {i} uses a different wavelength grid"
        )));
    }
    let mut pooled: Vec<DMatrix<f64>> = Vec::with_capacity(cubes.len());
    for (i, cube) in cubes.iter().enumerate() {
        let x = pixel_matrix(cube);
        let e = vca(&x, per_cube_r, seed.wrapping_add(i as u64))?;
        pooled.push(e.spectra);
    }
    let total: usize = pooled.iter().map(|m| m.ncols()).sum();
    if atoms == 0 || atoms > total {
        return Err(Error::InvalidArgument(format!(
            "cannot form {atoms} atoms from {total} pooled endmembers"
        )));
    }
    let mut all = DMatrix::zeros(first.bands(), total);
    let mut at = 0;
    for m in &pooled {
        all.columns_mut(at, m.ncols()).copy_from(m);
        at += m.ncols();
    }
    let clusters = kmeans(&all, atoms, KMEANS_MAX_ITERS, KMEANS_TOL, seed)?;
    SpectralLibrary::new(clusters.centers, first.wavelengths().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let lib = SpectralLibrary::new(
            DMatrix::from_row_slice(2, 3, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]),
            vec![500.0, 600.0],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lib.json");
        lib.save(&p).unwrap();
        assert_eq!(SpectralLibrary::load(&p).unwrap(), lib);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"wavelengths_nm\""));
        assert!(text.contains("\"atoms\""));
    }

    #[test]
    fn zero_atom_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.2, 0.0, 0.4]);
        assert!(SpectralLibrary::new(a, vec![500.0, 600.0]).is_err());
    }

    #[test]
    fn empty_input() {
        assert!(build_library(&[], 2, 2, 0).is_err());
    }
}
