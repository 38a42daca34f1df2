use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::hetero::store::{Span, Store, VecName};
use crate::solvers::TransferSummary;

const VALUE_BYTES: f64 = std::mem::size_of::<f64>() as f64;

/// One direction of the host/accelerator link.
///
/// A copy snapshots its source when it is initiated and becomes visible at
/// the destination no earlier than `max(latency, bytes / bandwidth)` later.
#[derive(Debug)]
pub struct TransferChannel {
    latency: Duration,
    /// Bytes per second; infinite means size-independent.
    bandwidth: f64,
    copies: AtomicU64,
    values: AtomicU64,
    in_flight: Mutex<Vec<VecName>>,
}

impl TransferChannel {
    /// A bandwidth of zero means unlimited.
    pub fn new(latency: Duration, bandwidth_bytes_per_sec: f64) -> Result<Self> {
        if !(bandwidth_bytes_per_sec >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must not be negative, got {bandwidth_bytes_per_sec}"
            )));
        }
        let bandwidth = if bandwidth_bytes_per_sec == 0.0 {
            f64::INFINITY
        } else {
            bandwidth_bytes_per_sec
        };
        Ok(Self {
            latency,
            bandwidth,
            copies: AtomicU64::new(0),
            values: AtomicU64::new(0),
            in_flight: Mutex::new(Vec::new()),
        })
    }

    /// Zero latency, unlimited bandwidth.
    pub fn instant() -> Self {
        Self::new(Duration::ZERO, f64::INFINITY).expect("unlimited bandwidth is valid")
    }

    pub fn latency(&self) -> Duration {
        self.latency
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Time for `values` doubles to arrive.
    pub fn delay_for(&self, values: usize) -> Duration {
        let wire = Duration::from_secs_f64(values as f64 * VALUE_BYTES / self.bandwidth);
        self.latency.max(wire)
    }

    pub fn stats(&self) -> TransferSummary {
        TransferSummary {
            copies: self.copies.load(Ordering::Acquire),
            values: self.values.load(Ordering::Acquire),
        }
    }

    /// Starts copying `spans` out of `src`.
    ///
    /// Fails if a span names a vector that is already in flight on this
    /// channel, is not resident, or is out of bounds.
    pub fn copy_async(&self, src: &Store, spans: &[Span]) -> Result<CopyHandle<'_>> {
        let initiated = Instant::now();
        let mut parts = Vec::with_capacity(spans.len());
        for span in spans {
            let data = src.get(span.name)?;
            let range = span.resolve(data.len())?;
            parts.push(Part {
                name: span.name,
                range: span.range.as_ref().map(|_| range.clone()),
                data: data[range].to_vec(),
            });
        }
        let names: Vec<VecName> = parts.iter().map(|p| p.name).collect();
        {
            let mut in_flight = self.in_flight.lock().expect("in-flight list poisoned");
            for (i, name) in names.iter().enumerate() {
                if in_flight.contains(name) || names[..i].contains(name) {
                    return Err(Error::ContractViolation(format!(
                        "vector `{name}` is already in flight on this channel"
                    )));
                }
            }
            in_flight.extend_from_slice(&names);
        }
        let count: usize = parts.iter().map(|p| p.data.len()).sum();
        self.copies.fetch_add(1, Ordering::AcqRel);
        self.values.fetch_add(count as u64, Ordering::AcqRel);
        Ok(CopyHandle {
            channel: self,
            parts,
            names,
            ready_at: initiated + self.delay_for(count),
        })
    }

    fn release(&self, names: &[VecName]) {
        if let Ok(mut in_flight) = self.in_flight.lock() {
            in_flight.retain(|n| !names.contains(n));
        }
    }
}

#[derive(Debug)]
struct Part {
    name: VecName,
    range: Option<Range<usize>>,
    data: Vec<f64>,
}

/// An in-flight copy. Dropping it without waiting abandons the copy.
#[derive(Debug)]
pub struct CopyHandle<'c> {
    channel: &'c TransferChannel,
    parts: Vec<Part>,
    names: Vec<VecName>,
    ready_at: Instant,
}

impl CopyHandle<'_> {
    pub fn ready_at(&self) -> Instant {
        self.ready_at
    }

    pub fn values(&self) -> usize {
        self.parts.iter().map(|p| p.data.len()).sum()
    }

    /// Blocks until the copy has arrived and writes it into `dst`. Whole-vector
    /// spans replace the destination vector; ranged spans overwrite that
    /// range of an existing one. Returns the time spent blocked.
    pub fn wait(mut self, dst: &mut Store) -> Result<Duration> {
        let now = Instant::now();
        let blocked = self.ready_at.saturating_duration_since(now);
        if !blocked.is_zero() {
            thread::sleep(blocked);
        }
        for part in self.parts.drain(..) {
            match part.range {
                None => {
                    dst.insert(part.name, part.data);
                }
                Some(range) => {
                    let target = dst.get_mut(part.name)?;
                    if range.end > target.len() {
                        return Err(Error::SpanOutOfBounds {
                            name: part.name.as_str(),
                            range,
                            len: target.len(),
                        });
                    }
                    target[range].copy_from_slice(&part.data);
                }
            }
        }
        Ok(blocked)
    }
}

impl Drop for CopyHandle<'_> {
    fn drop(&mut self) {
        self.channel.release(&self.names);
    }
}

/// Both directions of the link.
#[derive(Debug)]
pub struct ChannelPair {
    pub to_accel: TransferChannel,
    pub to_host: TransferChannel,
}

impl ChannelPair {
    pub fn symmetric(latency: Duration, bandwidth_bytes_per_sec: f64) -> Result<Self> {
        Ok(Self {
            to_accel: TransferChannel::new(latency, bandwidth_bytes_per_sec)?,
            to_host: TransferChannel::new(latency, bandwidth_bytes_per_sec)?,
        })
    }

    pub fn instant() -> Self {
        Self {
            to_accel: TransferChannel::instant(),
            to_host: TransferChannel::instant(),
        }
    }

    pub fn stats(&self) -> TransferSummary {
        let a = self.to_accel.stats();
        let h = self.to_host.stats();
        TransferSummary {
            copies: a.copies + h.copies,
            values: a.values + h.values,
        }
    }
}

pub(crate) fn transfers_since(before: TransferSummary, after: TransferSummary) -> TransferSummary {
    TransferSummary {
        copies: after.copies - before.copies,
        values: after.values - before.values,
    }
}
