/// A run of consecutive records. `partial` marks a short final batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T> {
    pub id: u64,
    pub records: Vec<T>,
    pub partial: bool,
}

/// Consecutive non-overlapping batches of `size` items; the last may be short.
#[derive(Debug, Clone)]
pub struct Windows<I> {
    inner: I,
    size: usize,
    next_id: u64,
}

/// `size` must be at least 1.
pub fn windows<I: IntoIterator>(stream: I, size: usize) -> Windows<I::IntoIter> {
    assert!(size >= 1, "window size must be at least 1");
    Windows {
        inner: stream.into_iter(),
        size,
        next_id: 0,
    }
}

impl<I: Iterator> Iterator for Windows<I> {
    type Item = Batch<I::Item>;

    fn next(&mut self) -> Option<Self::Item> {
        let records: Vec<I::Item> = self.inner.by_ref().take(self.size).collect();
        if records.is_empty() {
            return None;
        }
        let id = self.next_id;
        self.next_id += 1;
        Some(Batch {
            id,
            partial: records.len() < self.size,
            records,
        })
    }
}

/// Like [`windows`] over a fallible stream; stops after the first error.
pub fn try_windows<T, E, I>(stream: I, size: usize) -> TryWindows<I::IntoIter>
where
    I: IntoIterator<Item = Result<T, E>>,
{
    assert!(size >= 1, "window size must be at least 1");
    TryWindows {
        inner: stream.into_iter(),
        size,
        next_id: 0,
        failed: false,
    }
}

#[derive(Debug, Clone)]
pub struct TryWindows<I> {
    inner: I,
    size: usize,
    next_id: u64,
    failed: bool,
}

impl<T, E, I: Iterator<Item = Result<T, E>>> Iterator for TryWindows<I> {
    type Item = Result<Batch<T>, E>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let mut records = Vec::with_capacity(self.size.min(1 << 20));
        while records.len() < self.size {
            match self.inner.next() {
                Some(Ok(r)) => records.push(r),
                Some(Err(e)) => {
                    self.failed = true;
                    return Some(Err(e));
                }
                None => break,
            }
        }
        if records.is_empty() {
            return None;
        }
        let id = self.next_id;
        self.next_id += 1;
        Some(Ok(Batch {
            id,
            partial: records.len() < self.size,
            records,
        }))
    }
}
