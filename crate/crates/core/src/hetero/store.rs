use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::sparse::kernels::{DependentSlices, IndependentSlices, PipecgSlices, PipecgVectors};

/// Names of the vectors a device may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VecName {
    X,
    R,
    U,
    W,
    M,
    N,
    Z,
    Q,
    S,
    P,
}

impl VecName {
    pub const ALL: [VecName; 10] = [
        VecName::X,
        VecName::R,
        VecName::U,
        VecName::W,
        VecName::M,
        VecName::N,
        VecName::Z,
        VecName::Q,
        VecName::S,
        VecName::P,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VecName::X => "x",
            VecName::R => "r",
            VecName::U => "u",
            VecName::W => "w",
            VecName::M => "m",
            VecName::N => "n",
            VecName::Z => "z",
            VecName::Q => "q",
            VecName::S => "s",
            VecName::P => "p",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for VecName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A whole vector, or an index range of one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub name: VecName,
    pub range: Option<Range<usize>>,
}

impl Span {
    pub fn whole(name: VecName) -> Self {
        Self { name, range: None }
    }

    pub fn range(name: VecName, range: Range<usize>) -> Self {
        Self {
            name,
            range: Some(range),
        }
    }

    /// Resolves the span against a vector of length `len`.
    pub fn resolve(&self, len: usize) -> Result<Range<usize>> {
        match &self.range {
            None => Ok(0..len),
            Some(r) if r.start <= r.end && r.end <= len => Ok(r.clone()),
            Some(r) => Err(Error::SpanOutOfBounds {
                name: self.name.as_str(),
                range: r.clone(),
                len,
            }),
        }
    }
}

/// Device-resident vectors, addressed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Store {
    slots: [Option<Vec<f64>>; 10],
}

fn missing(name: VecName) -> Error {
    Error::UnknownVector {
        name: name.as_str(),
    }
}

fn slot_mut(slot: &mut Option<Vec<f64>>, name: VecName) -> Result<&mut [f64]> {
    slot.as_deref_mut().ok_or_else(|| missing(name))
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    /// Installs `values` under `name`, returning the previous vector.
    pub fn insert(&mut self, name: VecName, values: Vec<f64>) -> Option<Vec<f64>> {
        self.slots[name.index()].replace(values)
    }

    pub fn remove(&mut self, name: VecName) -> Option<Vec<f64>> {
        self.slots[name.index()].take()
    }

    /// Removes a vector that must be resident. Pair with [`Store::insert`] to
    /// borrow one vector mutably while reading others.
    pub fn take(&mut self, name: VecName) -> Result<Vec<f64>> {
        self.remove(name).ok_or_else(|| missing(name))
    }

    pub fn contains(&self, name: VecName) -> bool {
        self.slots[name.index()].is_some()
    }

    pub fn get(&self, name: VecName) -> Result<&[f64]> {
        self.slots[name.index()]
            .as_deref()
            .ok_or_else(|| missing(name))
    }

    pub fn get_mut(&mut self, name: VecName) -> Result<&mut [f64]> {
        self.slots[name.index()]
            .as_deref_mut()
            .ok_or_else(|| missing(name))
    }

    pub fn len_of(&self, name: VecName) -> Result<usize> {
        self.get(name).map(<[f64]>::len)
    }

    pub fn install(&mut self, v: PipecgVectors) {
        let PipecgVectors {
            x,
            r,
            u,
            w,
            m,
            n,
            z,
            q,
            s,
            p,
        } = v;
        for (name, values) in VecName::ALL.into_iter().zip([x, r, u, w, m, n, z, q, s, p]) {
            self.insert(name, values);
        }
    }

    pub fn pipecg_slices(&mut self) -> Result<PipecgSlices<'_>> {
        let [x, r, u, w, m, n, z, q, s, p] = &mut self.slots;
        Ok(PipecgSlices {
            x: slot_mut(x, VecName::X)?,
            r: slot_mut(r, VecName::R)?,
            u: slot_mut(u, VecName::U)?,
            w: slot_mut(w, VecName::W)?,
            z: slot_mut(z, VecName::Z)?,
            q: slot_mut(q, VecName::Q)?,
            s: slot_mut(s, VecName::S)?,
            p: slot_mut(p, VecName::P)?,
            m: m.as_deref().ok_or_else(|| missing(VecName::M))?,
            n: n.as_deref().ok_or_else(|| missing(VecName::N))?,
        })
    }

    /// Slices for the updates that do not read `z` or `n`. `m` is passed in
    /// because on a split device only a segment of the resident `m` is local.
    pub fn independent_slices<'a>(&'a mut self, m: &'a [f64]) -> Result<IndependentSlices<'a>> {
        let [x, r, u, w, _, _, _, q, s, p] = &mut self.slots;
        Ok(IndependentSlices {
            x: slot_mut(x, VecName::X)?,
            r: slot_mut(r, VecName::R)?,
            u: slot_mut(u, VecName::U)?,
            q: slot_mut(q, VecName::Q)?,
            s: slot_mut(s, VecName::S)?,
            p: slot_mut(p, VecName::P)?,
            w: w.as_deref().ok_or_else(|| missing(VecName::W))?,
            m,
        })
    }

    pub fn dependent_slices(&mut self) -> Result<DependentSlices<'_>> {
        let [_, _, _, w, _, n, z, _, _, _] = &mut self.slots;
        Ok(DependentSlices {
            z: z.as_deref_mut().ok_or_else(|| missing(VecName::Z))?,
            w: w.as_deref_mut().ok_or_else(|| missing(VecName::W))?,
            n: n.as_deref().ok_or_else(|| missing(VecName::N))?,
        })
    }
}
