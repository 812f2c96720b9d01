use std::fmt;

use fixedbitset::FixedBitSet;

/// Membership of `1..=len`; bit `i - 1` holds `i`.
#[derive(Clone, PartialEq, Eq)]
pub struct Bitmap {
    bits: FixedBitSet,
}

impl Bitmap {
    pub fn new(len: u64) -> Self {
        Bitmap {
            bits: FixedBitSet::with_capacity(len as usize),
        }
    }

    pub fn full(len: u64) -> Self {
        let mut b = Self::new(len);
        b.bits.insert_range(..);
        b
    }

    pub fn len(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        n >= 1 && self.bits.contains((n - 1) as usize)
    }

    #[inline]
    pub fn insert(&mut self, n: u64) {
        debug_assert!(n >= 1 && n <= self.len());
        self.bits.insert((n - 1) as usize);
    }

    /// Inserts `lo..=hi`, clipped to `1..=len`.
    pub fn insert_run(&mut self, lo: u64, hi: u64) {
        let lo = lo.max(1);
        let hi = hi.min(self.len());
        if lo <= hi {
            self.bits.insert_range((lo - 1) as usize..hi as usize);
        }
    }

    /// Members `<= m`.
    pub fn count_upto(&self, m: u64) -> u64 {
        let m = m.min(self.len());
        self.bits.count_ones(..m as usize) as u64
    }

    pub fn count(&self) -> u64 {
        self.bits.count_ones(..) as u64
    }

    /// Members in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.ones().map(|i| i as u64 + 1)
    }

    pub fn union_with(&mut self, other: &Bitmap) {
        self.bits.union_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &Bitmap) {
        self.bits.intersect_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &Bitmap) {
        self.bits.difference_with(&other.bits);
    }

    pub fn complement(&mut self) {
        self.bits.toggle_range(..);
    }

    /// First common member, if any.
    pub fn first_common(&self, other: &Bitmap) -> Option<u64> {
        self.bits.intersection(&other.bits).next().map(|i| i as u64 + 1)
    }
}

impl fmt::Display for Bitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in 1..=self.len() {
            f.write_str(if self.contains(n) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitmap({self})")
    }
}
