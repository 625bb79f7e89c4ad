pub mod bgue;
pub mod dual;
pub mod landscape;
pub mod mipt;
pub mod selftest;

/// Progress line on stderr, overwritten in place.
pub fn progress(label: &'static str, quiet: bool) -> impl Fn(usize, usize) + Sync {
    move |done, total| {
        if !quiet {
            eprint!("\r[{label}] {done}/{total}");
            if done == total {
                eprintln!();
            }
        }
    }
}
