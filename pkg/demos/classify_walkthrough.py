"""Classify a few symbolic forms and compare them pairwise."""

from tforms import GermField, classify_form, congruent, discriminant, is_hyperbolic

fields = {
    "z - 1/2": GermField.from_zeros("z-0.5", [{"at": 0.5, "order": 1, "left": "-", "right": "+"}]),
    "|z - 1/2|": GermField.from_zeros("abs(z-0.5)", [{"at": 0.5, "order": 1}]),
    "2|z - 1/2|": GermField.from_zeros("2*abs(z-0.5)", [{"at": 0.5, "order": 1, "coeff": 2.0}]),
    "(z - 1/4)(z - 1/2)^2": GermField.from_zeros(
        "(z-0.25)*(z-0.5)^2",
        [
            {"at": 0.25, "order": 1, "left": "-", "right": "+", "coeff": 0.0625},
            {"at": 0.5, "order": 2, "left": "+", "right": "+", "coeff": 0.25},
        ],
    ),
}

for name, f in fields.items():
    rep = classify_form(discriminant(f), ns=False)
    print(f"{name:24s} positive {rep.positive.entries}")
    print(f"{'':24s} negative {rep.negative.entries}")

print()
names = list(fields)
for i, a in enumerate(names):
    for b in names[i + 1:]:
        ans = congruent(discriminant(fields[a]), discriminant(fields[b]), n=1024)
        extra = f"first difference {ans.distinguisher}" if not ans.value else \
            f"certificate residuals {[f'{c.residual:.1e}' for c in ans.certificates]}"
        print(f"{a} ~ {b}: {ans.value} ({extra})")

print()
psi = (fields["|z - 1/2|"], -fields["2|z - 1/2|"])
h = is_hyperbolic(discriminant(psi), n=1024)
print("|z-1/2| (+) -2|z-1/2| hyperbolic:", h.value, "off-diagonal residual", h.structure["offdiagonal_residual"])
