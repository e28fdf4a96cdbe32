n = int(input().split())
print(n)
