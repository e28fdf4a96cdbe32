n, x = map(int, input().split())
a = list(map(int, input().split()))
print(sum(1 for v in a if v >= x))
