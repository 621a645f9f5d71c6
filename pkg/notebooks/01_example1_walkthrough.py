"""
Walking through the four-object loop
====================================

Four objects come out of one allocation site inside a loop.  The detector
samples a load from the first object, skips the second, and pairs the third
with the first by watching the same offset.  The fourth is then paired with
the third.  One comparison matches and one does not.
"""

# %%
from objreplica.replay import DetectConfig, ThreadReplayer, split_threads
from objreplica.trace import Alloc
from objreplica.workload import EXAMPLE1_ALLOC_PATH, example1_trace

events = example1_trace()
frames, streams = split_threads(events)
for ev in streams[1]:
    if isinstance(ev, Alloc):
        print(f"alloc O{ev.obj_id} at {ev.base_addr:#x}, {ev.size} bytes")

# %%
# Replay with every load sampled and four watchpoints, printing each outcome
# as it happens.
replayer = ThreadReplayer(1, DetectConfig(period=1, jitter=0.0, watchpoints=4), frames)
replayer.detector.keep_outcomes = True
seen = 0
for ev in streams[1]:
    replayer.feed(ev)
    outs = replayer.detector.outcomes
    while seen < len(outs):
        o = outs[seen]
        seen += 1
        verdict = "equal" if o.equal else "different"
        print(f"O{o.old_obj_id} vs O{o.new_obj_id} at +{o.offset}: "
              f"{o.old_value} / {o.new_value} -> {verdict}")

# %%
prof = replayer.profile()
c = prof.context(EXAMPLE1_ALLOC_PATH)
print(f"equivalent={c.equivalent} different={c.different} "
      f"theta={c.equivalent / c.comparisons:.2f} over X={c.objects} objects")
