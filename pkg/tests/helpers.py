"""Small hand-built traces shared by several test modules."""

from objreplica.trace import Access, Alloc, FrameDef, Free

FRAMES = [FrameDef(1, "main"), FrameDef(2, "make"), FrameDef(3, "read"), FrameDef(4, "other")]
ALLOC = (1, 2)
READ = (1, 3)
OTHER = (1, 4)


class Builder:
    """Appends events for one thread with automatic timestamps."""

    def __init__(self, tid=1, frames=True):
        self.tid = tid
        self.ts = 0
        self.events = list(FRAMES) if frames else []

    def _ts(self):
        self.ts += 1
        return self.ts

    def alloc(self, obj, base, size=16, ctx=ALLOC):
        self.events.append(Alloc(self.tid, self._ts(), obj, base, size, ctx))
        return self

    def free(self, obj):
        self.events.append(Free(self.tid, self._ts(), obj))
        return self

    def load(self, addr, value, ctx=READ, width=8):
        self.events.append(Access(self.tid, self._ts(), True, addr, width, value, ctx))
        return self

    def store(self, addr, value, ctx=READ, width=8):
        self.events.append(Access(self.tid, self._ts(), False, addr, width, value, ctx))
        return self


def pair_trace(v_old, v_new, ctx_new=READ):
    """Two 16-byte objects; each read once at offset 0, the second from ``ctx_new``."""
    b = Builder()
    b.alloc(1, 0x100).load(0x100, v_old).free(1)
    b.alloc(2, 0x200).load(0x200, v_new, ctx=ctx_new).load(0x200, v_new, ctx=ctx_new).free(2)
    return b.events
