"""Independent CoDel transcription used only as a test oracle.

Written from the published reference pseudocode (dodequeue / dequeue with
count, lastcount and the interval/sqrt(count) control law), kept separate from
``mmbloat.aqm`` so the two can be compared on identical traces.
"""
import math
from collections import deque


class RefCoDel:
    def __init__(self, target=0.005, interval=0.100, maxpacket=1500, limit=50_000):
        self.target_ = target
        self.interval_ = interval
        self.maxpacket_ = maxpacket
        self.limit_ = limit
        self.q = deque()
        self.bytes_ = 0
        self.first_above_time_ = 0.0
        self.drop_next_ = 0.0
        self.count_ = 0
        self.lastcount_ = 0
        self.dropping_ = False
        self.dropped = []

    def enqueue(self, seq, size, now):
        if len(self.q) >= self.limit_:
            self.dropped.append(seq)
            return False
        self.q.append((seq, size, now))
        self.bytes_ += size
        return True

    def _control_law(self, t):
        return t + self.interval_ / math.sqrt(self.count_)

    def _dodequeue(self, now):
        if not self.q:
            self.first_above_time_ = 0.0
            return None, False
        p = self.q.popleft()
        self.bytes_ -= p[1]
        ok_to_drop = False
        sojourn_time = now - p[2]
        if sojourn_time < self.target_ or self.bytes_ <= self.maxpacket_:
            self.first_above_time_ = 0.0
        else:
            if self.first_above_time_ == 0.0:
                self.first_above_time_ = now + self.interval_
            elif now >= self.first_above_time_:
                ok_to_drop = True
        return p, ok_to_drop

    def dequeue(self, now):
        p, ok_to_drop = self._dodequeue(now)
        if self.dropping_:
            if not ok_to_drop:
                self.dropping_ = False
            while now >= self.drop_next_ and self.dropping_:
                self.dropped.append(p[0])
                self.count_ += 1
                p, ok_to_drop = self._dodequeue(now)
                if not ok_to_drop:
                    self.dropping_ = False
                else:
                    self.drop_next_ = self._control_law(self.drop_next_)
        elif ok_to_drop:
            self.dropped.append(p[0])
            p, ok_to_drop = self._dodequeue(now)
            self.dropping_ = True
            delta = self.count_ - self.lastcount_
            self.count_ = 1
            if delta > 1 and now - self.drop_next_ < 16 * self.interval_:
                self.count_ = delta
            self.drop_next_ = self._control_law(now)
            self.lastcount_ = self.count_
        return None if p is None else p[0]
