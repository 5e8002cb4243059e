//! Rotary inverted pendulum: plant model, fuzzy approximators, tracking
//! controllers, and a fixed-step closed-loop simulator.

pub mod cli;
pub mod control;
pub mod fuzzy;
pub mod plant;
pub mod sim;

// Compiles and runs every code block in the guide, so the book cannot
// drift from the API.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(plant, "../../../book/src/plant.md");
    chapter!(linearization, "../../../book/src/linearization.md");
    chapter!(fuzzy, "../../../book/src/fuzzy.md");
    chapter!(adaptation, "../../../book/src/adaptation.md");
    chapter!(simulation, "../../../book/src/simulation.md");
    chapter!(cli, "../../../book/src/cli.md");
}
