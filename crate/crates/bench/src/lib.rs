pub use filmdyn;
