//! The simulation's logical clock. One tick stands in for roughly one day;
//! nothing in the workspace reads wall-clock time.

pub type Tick = u64;

#[derive(Debug, Clone, Default)]
pub struct Clock {
    now: Tick,
}

impl Clock {
    pub fn new() -> Self {
        Self { now: 0 }
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    /// Clocks only move forward.
    pub fn advance(&mut self, ticks: Tick) {
        self.now += ticks;
    }
}
