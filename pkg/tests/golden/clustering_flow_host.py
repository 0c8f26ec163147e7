# ldekit dataflow host script
r_n_load = load_table()
r_n_prep__n_clean = clean(r_n_load)
r_n_prep__n_stats = stats(r_n_prep__n_clean)
r_n_report = publish(r_n_prep__n_stats)
print(r_n_report)
