//! Deliberate corruption of the satisfaction measure, used to confirm that
//! the verification suites catch a broken engine. Only compiled with the
//! `fault-injection` feature; the switch is per thread.

use std::cell::Cell;

thread_local! {
    static ACTIVE: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with the fault active on the current thread. While active,
/// `sat_level` counts a history as good when *some* run consistent with it
/// lies in the guarantee, instead of every run.
pub fn with_fault<T>(f: impl FnOnce() -> T) -> T {
    struct Reset(bool);
    impl Drop for Reset {
        fn drop(&mut self) {
            ACTIVE.with(|a| a.set(self.0));
        }
    }
    let _reset = Reset(ACTIVE.with(|a| a.replace(true)));
    f()
}

pub(crate) fn active() -> bool {
    ACTIVE.with(|a| a.get())
}
