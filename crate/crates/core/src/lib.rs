//! Splice diagrams, splice type systems and their local tropicalizations in
//! exact arithmetic.
//!
//! The crate is organised bottom-up:
//!
//! * [`diagram`]: weighted trees, linking numbers, admissible co-weights;
//! * [`system`]: splice type equations, Hamm conditions, initial forms;
//! * [`fan`]: splice fans, membership certificates, balancing, boundary
//!   tropicalizations and the Newton non-degeneracy smoke test;
//! * [`endcurve`]: end-curves, their binomial form and parameterizations;
//! * [`recover`]: reconstruction of coprime diagrams from weighted fans;
//! * [`doc`]: the JSON documents used by the command-line tool.

pub mod arith;
pub mod diagram;
pub mod doc;
pub mod endcurve;
pub mod fan;
pub mod poly;
pub mod random;
pub mod recover;
pub mod system;
pub mod torus;
