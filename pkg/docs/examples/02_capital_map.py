"""Cultural, economic and penetration capital for each neighbourhood.

Run: ``python docs/examples/02_capital_map.py``
"""

from culturank import metrics

from _common import fixture_city

paths, city, census = fixture_city()
print("records:", city.report)

cult = metrics.cultural_capital(city.stats)
econ = metrics.economic_capital(census, [2010], locations=city.stats)
pen = metrics.penetration(city.stats)

# Cultural capital is the z-scored share of tags that match the taxonomy.
# It need not follow income: look for places where the two disagree.
print("\nlocation  cultural  economic  penetration  specialization")
caps = metrics.category_capitals(city.stats)
for loc in sorted(cult.values):
    spec = metrics.specialization(caps, loc)
    print(f"{loc:8s}  {cult[loc]:+8.2f}  {econ.values.get(loc, float('nan')):+8.2f}"
          f"  {pen[loc]:+11.2f}  {spec}")

# Diversity: bias-corrected entropy of the category mix.
div = {loc: metrics.diversity(st) for loc, st in sorted(city.stats.items()) if st.n_cultural}
top = max(div, key=lambda k: div[k].value)
print(f"\nmost diverse: {top} H={div[top].value:.3f} "
      f"(plug-in {div[top].plugin:.3f} + correction {div[top].correction})")
