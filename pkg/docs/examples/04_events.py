"""Find months when a neighbourhood was unusually cultural.

Each location's monthly cultural fraction is z-scored against its own
history. Months above the upper Tukey fence are reported with their most
frequent cultural terms.

Run: ``python docs/examples/04_events.py``
"""

from culturank import metrics
from culturank.errors import DegenerateError, InsufficientDataError

from _common import fixture_city

paths, city, census = fixture_city()
peaks = []
for loc, st in sorted(city.stats.items()):
    try:
        monthly = metrics.monthly_capital(st)
    except (DegenerateError, InsufficientDataError):
        continue
    peaks += metrics.detect_events(monthly.z, month_terms=st.month_terms, location=loc)

peaks.sort(key=lambda p: -p.z)
for p in peaks[:8]:
    print(f"{p.location} {p.month}  z={p.z:5.2f} (fence {p.fence:.2f})  {', '.join(p.top_terms)}")
