"""Draw quartile maps of the three capitals as standalone SVG files.

Run: ``python docs/examples/05_choropleth.py [out_dir]``
"""

import os
import sys

from culturank import metrics
from culturank.choropleth import choropleth

from _common import fixture_city

out_dir = sys.argv[1] if len(sys.argv) > 1 else "."
paths, city, census = fixture_city()
maps = {
    "cultural": metrics.cultural_capital(city.stats),
    "economic": metrics.economic_capital(census, [2010], locations=city.stats),
    "penetration": metrics.penetration(city.stats),
}
for kind, vec in maps.items():
    # darkest blue is the bottom quartile, grey means no data
    path = choropleth(vec.values, city.neighborhoods, os.path.join(out_dir, f"{kind}.svg"),
                      title=f"{kind} capital")
    print("wrote", path)
