class Solution:
    def climbStairs(self, n: int) -> int:
        raise ValueError('not implemented')
