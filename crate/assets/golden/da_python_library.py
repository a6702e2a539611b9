import pandas as pd
import matplotlib.pyplot as plt

sales = pd.read_csv("sales.csv", parse_dates=["date"])
monthly = sales.set_index("date").resample("ME")["amount"].sum()
monthly.plot(kind="bar")
plt.savefig("trend.png")
