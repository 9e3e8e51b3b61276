"""Physical constants. Everything internal is in Hartree atomic units."""

HBAR = 1.0

# fs appears only at I/O boundaries.
FS_TO_AU = 41.341374575751
AU_TO_FS = 1.0 / FS_TO_AU
