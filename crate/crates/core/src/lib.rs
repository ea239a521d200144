pub mod averages;
pub mod corpus;
pub mod coupling;
pub mod cyclotomic;
pub mod error;
pub mod io;
pub mod joinings;
pub mod lp;
pub mod observable;
pub mod partition;
pub mod perm;
pub mod rational;
pub mod system;
