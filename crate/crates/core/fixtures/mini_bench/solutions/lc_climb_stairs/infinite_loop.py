import time


class Solution:
    def climbStairs(self, n: int) -> int:
        while True:
            time.sleep(1)
