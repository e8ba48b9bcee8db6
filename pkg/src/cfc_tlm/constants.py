"""Physical constants (SI)."""

C0 = 299_792_458.0
MU0 = 1.25663706212e-6
EPS0 = 1.0 / (MU0 * C0 * C0)
# Free-space wave impedance, ~376.730 ohm.  Kept exactly consistent with
# MU0/EPS0 so a vacuum layer is perfectly matched to the background links.
ETA0 = MU0 * C0
Y0 = 1.0 / ETA0
