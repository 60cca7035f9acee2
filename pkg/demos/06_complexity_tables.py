"""Closed-form verification complexity for all four comparators at the
reference operating point (F=250 features, 0.5 KiB per ciphertext, 64-bit
plain features), plus the preload variants of the two-key scheme."""

from hevoice.protocol import COMPARATOR_KINDS, complexity_report, preload_analysis

NU_BYTES = 512.0  # 2n bits for a 2048-bit modulus
F = 250

rows = [
    ("encryptions", "{:,}"),
    ("decryptions", "{:,}"),
    ("additions", "{:,}"),
    ("products", "{:,}"),
    ("exponentiations", "{:,}"),
]

reports = {kind: complexity_report(kind, F, NU_BYTES, 64)
           for kind in COMPARATOR_KINDS}

header = f"{'':<28}" + "".join(f"{kind:>16}" for kind in COMPARATOR_KINDS)
print(header)
print("-" * len(header))
for row, fmt in rows:
    cells = "".join(f"{fmt.format(reports[k][row]):>16}" for k in COMPARATOR_KINDS)
    print(f"{row:<28}{cells}")


def size(report, key):
    kib = report[key] / 1024.0
    return f"{kib:,.1f} KiB" if kib < 4096 else f"{kib / 1024.0:,.1f} MiB"


for row in ("plain_template_bytes", "protected_template_bytes",
            "plain_model_bytes", "protected_model_bytes", "channel_bytes"):
    cells = "".join(
        f"{size(reports[k], row) if row in reports[k] else '-':>16}"
        for k in COMPARATOR_KINDS)
    print(f"{row[:-6]:<28}{cells}")

pre = preload_analysis(F, NU_BYTES)
print(f"\ntwo-key scheme with the encrypted model preloaded: "
      f"{pre['model_preloaded_mib']:.1f} MiB per verification")
print(f"with model and templates preloaded:                "
      f"{pre['model_and_templates_preloaded_mib']:.1f} MiB per verification")
