"""Does cultural capital explain development beyond income?

Run: ``python docs/examples/03_regressions.py``
"""

from culturank import metrics, stats

from _common import fixture_city

paths, city, census = fixture_city()
cult = metrics.cultural_capital(city.stats)
econ = metrics.economic_capital(census, [2010], locations=city.stats)

dev = census.series("dev", 2015)
full = stats.model_development(cult, econ, dev)
print(full.to_text())

# Change in development over five years as the response.
change = stats.delta(dev, census.series("dev", 2010))
print(stats.model_development(cult, econ, change.values, response_name="delta_dev").to_text())

# House prices: nested models show what culture adds over income alone.
price = census.mean_over("house_price", [2015])
both = stats.model_house_price(cult, econ, price)
income_only = stats.model_house_price(cult, econ, price, cultural=False)
print(f"house price R2: income only {income_only.r2:.3f}, with culture {both.r2:.3f}")

# Which single category best tracks prices?
for row in stats.model_category_house(metrics.category_capitals(city.stats), econ, price):
    mark = "  <- best" if row.best else ""
    print(f"  category {row.code}: R2 {row.r2:.3f}{mark}")
