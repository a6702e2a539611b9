import csv
import statistics

with open("sales.csv") as handle:
    amounts = [float(row["amount"]) for row in csv.DictReader(handle)]

print("mean", statistics.mean(amounts))
print("stdev", statistics.stdev(amounts))
