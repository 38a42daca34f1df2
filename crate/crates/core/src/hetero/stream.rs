use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::{Scope, ScopedJoinHandle};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::hetero::device::Device;
use crate::hetero::store::Store;

type Job<'s> = Box<dyn FnOnce(&Device, &mut Store) + Send + 's>;

/// An in-order job queue driving one device and its store from a dedicated
/// thread.
///
/// A job whose result nobody waits for and which fails poisons the stream:
/// later jobs are skipped and report the original failure.
pub struct DeviceStream<'s> {
    sender: Option<Sender<Job<'s>>>,
    device: &'static str,
    busy_ns: Arc<AtomicU64>,
    fault: Arc<Mutex<Option<String>>>,
    thread: Option<ScopedJoinHandle<'s, ()>>,
}

/// Result of a submitted job.
#[must_use = "dropping a Pending turns its job into fire-and-forget"]
pub struct Pending<R> {
    rx: Receiver<Result<R>>,
    device: &'static str,
}

impl<R> Pending<R> {
    pub fn wait(self) -> Result<R> {
        self.rx.recv().map_err(|_| Error::DeviceLost(self.device))?
    }

    /// Like [`Pending::wait`], also returning the time spent blocked.
    pub fn wait_timed(self) -> Result<(R, Duration)> {
        let start = Instant::now();
        let out = self.wait()?;
        Ok((out, start.elapsed()))
    }
}

impl<'s> DeviceStream<'s> {
    pub fn spawn<'env>(scope: &'s Scope<'s, 'env>, device: &'s Device, mut store: Store) -> Self {
        let (sender, receiver) = mpsc::channel::<Job<'s>>();
        let busy_ns = Arc::new(AtomicU64::new(0));
        let busy = Arc::clone(&busy_ns);
        let thread = scope.spawn(move || {
            for job in receiver {
                let start = Instant::now();
                job(device, &mut store);
                busy.fetch_add(start.elapsed().as_nanos() as u64, Ordering::AcqRel);
            }
        });
        Self {
            sender: Some(sender),
            device: device.id().as_str(),
            busy_ns,
            fault: Arc::new(Mutex::new(None)),
            thread: Some(thread),
        }
    }

    /// Queues `job` behind everything submitted earlier.
    pub fn submit<R, F>(&self, job: F) -> Pending<R>
    where
        R: Send + 's,
        F: FnOnce(&Device, &mut Store) -> Result<R> + Send + 's,
    {
        let (tx, rx) = mpsc::channel();
        let fault = Arc::clone(&self.fault);
        let device = self.device;
        let boxed: Job<'s> = Box::new(move |dev, store| {
            let prior = fault.lock().expect("fault slot poisoned").clone();
            let out = match prior {
                Some(message) => Err(Error::StreamFault { device, message }),
                None => job(dev, store),
            };
            if let Err(unobserved) = tx.send(out) {
                if let Err(e) = unobserved.0 {
                    let mut slot = fault.lock().expect("fault slot poisoned");
                    slot.get_or_insert_with(|| e.to_string());
                }
            }
        });
        if let Some(sender) = &self.sender {
            // a closed queue surfaces as DeviceLost from wait()
            let _ = sender.send(boxed);
        }
        Pending {
            rx,
            device: self.device,
        }
    }

    /// Queues a job nobody will wait for.
    pub fn launch<F>(&self, job: F)
    where
        F: FnOnce(&Device, &mut Store) -> Result<()> + Send + 's,
    {
        drop(self.submit(job));
    }

    /// Waits for all queued work, reporting any unobserved failure.
    pub fn synchronize(&self) -> Result<()> {
        self.submit(|_, _| Ok(())).wait()
    }

    /// Total time spent executing jobs so far.
    pub fn busy_time(&self) -> Duration {
        Duration::from_nanos(self.busy_ns.load(Ordering::Acquire))
    }
}

impl Drop for DeviceStream<'_> {
    fn drop(&mut self) {
        self.sender.take();
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}
