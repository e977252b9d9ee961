use alloc::vec;
use alloc::vec::Vec;

use crate::simkit::RadarSpec;
use crate::{Complex, Error, Result};

/// Dense `[rows × antennas × time]` block.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube3<T> {
    rows: usize,
    antennas: usize,
    time: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Cube3<T> {
    pub fn zeros(rows: usize, antennas: usize, time: usize) -> Self {
        Cube3 {
            rows,
            antennas,
            time,
            data: vec![T::default(); rows * antennas * time],
        }
    }
}

impl<T: Copy> Cube3<T> {
    pub fn from_vec(rows: usize, antennas: usize, time: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * antennas * time {
            return Err(Error::Shape(alloc::format!(
                "{} values for a {rows}x{antennas}x{time} cube",
                data.len()
            )));
        }
        Ok(Cube3 {
            rows,
            antennas,
            time,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.rows, self.antennas, self.time]
    }

    #[inline]
    pub fn index(&self, row: usize, antenna: usize, t: usize) -> usize {
        (row * self.antennas + antenna) * self.time + t
    }

    #[inline]
    pub fn get(&self, row: usize, antenna: usize, t: usize) -> T {
        self.data[self.index(row, antenna, t)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, antenna: usize, t: usize, v: T) {
        let i = self.index(row, antenna, t);
        self.data[i] = v;
    }

    /// Contiguous slow-time series for one (row, antenna).
    pub fn series(&self, row: usize, antenna: usize) -> &[T] {
        let start = self.index(row, antenna, 0);
        &self.data[start..start + self.time]
    }

    pub fn series_mut(&mut self, row: usize, antenna: usize) -> &mut [T] {
        let start = self.index(row, antenna, 0);
        let len = self.time;
        &mut self.data[start..start + len]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Sub-cube covering slow-time samples `start..start + len`.
    pub fn slice_time(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.time, "time slice out of bounds");
        let mut data = Vec::with_capacity(self.rows * self.antennas * len);
        for r in 0..self.rows {
            for a in 0..self.antennas {
                data.extend_from_slice(&self.series(r, a)[start..start + len]);
            }
        }
        Cube3 {
            rows: self.rows,
            antennas: self.antennas,
            time: len,
            data,
        }
    }

    /// Keeps only the listed antennas, in the given order.
    pub fn select_antennas(&self, antennas: &[usize]) -> Result<Self> {
        if let Some(&bad) = antennas.iter().find(|&&a| a >= self.antennas) {
            return Err(Error::Shape(alloc::format!(
                "antenna {bad} of {}",
                self.antennas
            )));
        }
        let mut data = Vec::with_capacity(self.rows * antennas.len() * self.time);
        for r in 0..self.rows {
            for &a in antennas {
                data.extend_from_slice(self.series(r, a));
            }
        }
        Ok(Cube3 {
            rows: self.rows,
            antennas: antennas.len(),
            time: self.time,
            data,
        })
    }
}

/// Burst-averaged FMCW chirps, `[fast time × antennas × slow time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpCube {
    pub values: Cube3<f64>,
    pub spec: RadarSpec,
    /// Heart rate per slow-time sample, bpm.
    pub truth_hr: Vec<f64>,
}

/// Complex range profiles, `[range bins × antennas × slow time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfileCube {
    pub values: Cube3<Complex>,
    pub slow_time_rate: f64,
    pub spec: RadarSpec,
    /// Heart rate per slow-time sample, bpm (empty when unknown).
    pub truth_hr: Vec<f64>,
    /// Offset of the first sample within its recording, s.
    pub start_time: f64,
}

impl RangeProfileCube {
    pub fn bins(&self) -> usize {
        self.values.rows()
    }

    pub fn antennas(&self) -> usize {
        self.values.antennas()
    }

    pub fn time(&self) -> usize {
        self.values.time()
    }

    pub fn duration(&self) -> f64 {
        self.time() as f64 / self.slow_time_rate
    }
}
