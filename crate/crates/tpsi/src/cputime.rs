//! Per-phase timing of one party.

use std::time::{Duration, Instant};

use tpsi_core::channel::{Link, LinkError};
use tpsi_core::frame::{Frame, Phase};

/// CPU time consumed by the calling thread.
pub fn thread_cpu_time() -> Duration {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: `ts` is a valid out-pointer for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return Duration::ZERO;
    }
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}

/// Wall and thread-CPU instants at which each phase began.
#[derive(Debug, Clone, Default)]
pub struct PhaseMarks {
    pub marks: Vec<(Phase, Instant, Duration)>,
}

/// Wall and CPU durations of the share (distribution + refresh), collection
/// and whole-session spans.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub share_wall: Duration,
    pub reconstruct_wall: Duration,
    pub total_wall: Duration,
    pub share_cpu: Duration,
    pub reconstruct_cpu: Duration,
    pub total_cpu: Duration,
}

impl PhaseMarks {
    fn first(&self, phase: Phase) -> Option<(Instant, Duration)> {
        self.marks.iter().find(|m| m.0 == phase).map(|m| (m.1, m.2))
    }

    pub fn times(&self) -> Option<PhaseTimes> {
        let setup = self.first(Phase::Setup)?;
        let share = self.first(Phase::Share)?;
        let collect = self.first(Phase::Collect)?;
        let done = self.first(Phase::Done)?;
        Some(PhaseTimes {
            share_wall: collect.0 - share.0,
            reconstruct_wall: done.0 - collect.0,
            total_wall: done.0 - setup.0,
            share_cpu: collect.1 - share.1,
            reconstruct_cpu: done.1 - collect.1,
            total_cpu: done.1 - setup.1,
        })
    }
}

pub struct TimedLink<L> {
    inner: L,
    marks: PhaseMarks,
}

impl<L: Link> TimedLink<L> {
    pub fn new(inner: L) -> Self {
        TimedLink {
            inner,
            marks: PhaseMarks::default(),
        }
    }

    pub fn marks(&self) -> &PhaseMarks {
        &self.marks
    }
}

impl<L: Link> Link for TimedLink<L> {
    fn local(&self) -> u8 {
        self.inner.local()
    }

    fn parties(&self) -> usize {
        self.inner.parties()
    }

    fn send(&mut self, frame: Frame) -> Result<(), LinkError> {
        self.inner.send(frame)
    }

    fn recv(&mut self) -> Result<Frame, LinkError> {
        self.inner.recv()
    }

    fn phase_started(&mut self, phase: Phase) {
        self.marks
            .marks
            .push((phase, Instant::now(), thread_cpu_time()));
        self.inner.phase_started(phase)
    }
}
